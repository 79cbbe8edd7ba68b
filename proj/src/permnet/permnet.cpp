#include "pprs/permnet/permnet.hpp"

#include <numeric>

namespace pprs {

namespace {

void gen_switches(const std::vector<u32>& idx, std::vector<std::pair<u32, u32>>& out) {
  size_t n = idx.size();
  if (n <= 1) return;
  if (n == 2) {
    out.emplace_back(idx[0], idx[1]);
    return;
  }
  for (size_t i = 0; i < n / 2; ++i) out.emplace_back(idx[2 * i], idx[2 * i + 1]);
  std::vector<u32> top(n / 2), bot(n / 2);
  for (size_t i = 0; i < n / 2; ++i) {
    top[i] = idx[2 * i];
    bot[i] = idx[2 * i + 1];
  }
  gen_switches(top, out);
  gen_switches(bot, out);
  for (size_t j = 0; j + 1 < n / 2; ++j) out.emplace_back(idx[2 * j], idx[2 * j + 1]);
}

void route_rec(const std::vector<u32>& perm, std::vector<u8>& bits) {
  size_t n = perm.size();
  if (n <= 1) return;
  if (n == 2) {
    bits.push_back(perm[0] == 1);
    return;
  }
  std::vector<u32> inv(n);
  for (u32 o = 0; o < n; ++o) inv[perm[o]] = o;

  // 2-color outputs: 0 = via top subnetwork (even positions), 1 = bottom.
  // The omitted last output switch forces out n-2 -> top, n-1 -> bottom.
  std::vector<int> color(n, -1);
  auto chain = [&](u32 start, int c) {
    u32 o = start;
    while (color[o] == -1) {
      color[o] = c;
      u32 o2 = inv[perm[o] ^ 1];  // output fed by the partner input
      if (color[o2] == -1)
        color[o2] = 1 - c;
      else if (color[o2] != 1 - c)
        throw std::logic_error("routing: inconsistent coloring");
      o = o2 ^ 1;  // partner output must take color c
    }
    if (color[o] != c) throw std::logic_error("routing: cycle closed with wrong color");
  };
  chain(u32(n - 2), 0);
  if (color[n - 1] == -1) chain(u32(n - 1), 1);
  for (u32 o = 0; o < n; ++o)
    if (color[o] == -1) chain(o, 0);

  // input switch bits: swap iff the even input routes bottom
  for (size_t i = 0; i < n / 2; ++i) bits.push_back(color[inv[2 * i]] == 1);

  std::vector<u32> top_perm(n / 2), bot_perm(n / 2);
  for (u32 o = 0; o < n; ++o) {
    if (color[o] == 0)
      top_perm[o >> 1] = perm[o] >> 1;
    else
      bot_perm[o >> 1] = perm[o] >> 1;
  }
  route_rec(top_perm, bits);
  route_rec(bot_perm, bits);

  // output switch bits: swap iff the even output arrives from the bottom
  for (size_t j = 0; j + 1 < n / 2; ++j) bits.push_back(color[2 * j] == 1);
}

std::vector<u32> pad_identity(const std::vector<u32>& perm, size_t to) {
  std::vector<u32> p = perm;
  for (size_t i = perm.size(); i < to; ++i) p.push_back(u32(i));
  return p;
}

}  // namespace

Opn build_opn(size_t wires) {
  if (wires != next_pow2(wires)) throw std::invalid_argument("build_opn: wires not a power of two");
  Opn net;
  net.wires = wires;
  std::vector<u32> idx(wires);
  std::iota(idx.begin(), idx.end(), 0);
  gen_switches(idx, net.switches);
  return net;
}

BitVec route_opn(const Opn& net, const std::vector<u32>& perm) {
  if (perm.size() != net.wires) throw std::invalid_argument("route_opn: size mismatch");
  std::vector<u8> seen(perm.size(), 0);
  for (u32 v : perm) {
    if (v >= perm.size() || seen[v]) throw std::invalid_argument("route_opn: not a bijection");
    seen[v] = 1;
  }
  std::vector<u8> bits;
  bits.reserve(net.switches.size());
  route_rec(perm, bits);
  if (bits.size() != net.switches.size()) throw std::logic_error("route_opn: bit count mismatch");
  BitVec out(bits.size());
  for (size_t i = 0; i < bits.size(); ++i) out.set(i, bits[i]);
  return out;
}

NetworkShape build_shape(size_t m_real, size_t n_real, bool tail_drop) {
  if (n_real == 0 || m_real < n_real) throw std::invalid_argument("build_shape: bad sizes");
  NetworkShape s;
  s.m_real = m_real;
  s.n_real = n_real;
  s.m_pad = next_pow2(m_real);
  s.n_pad = next_pow2(n_real);
  s.tail_drop = tail_drop;

  Opn opn_m = build_opn(s.m_pad);
  for (auto [a, b] : opn_m.switches) s.switches.push_back({a, b, SwitchKind::permutation});
  s.phase_count[0] = opn_m.switches.size();

  size_t rw = s.repl_width();
  for (size_t i = 0; i + 1 < rw; ++i)
    s.switches.push_back({u32(i), u32(i + 1), SwitchKind::replication});
  s.phase_count[1] = orn_switches(rw);

  Opn opn_n = build_opn(rw);
  for (auto [a, b] : opn_n.switches) s.switches.push_back({a, b, SwitchKind::permutation});
  s.phase_count[2] = opn_n.switches.size();
  return s;
}

SwitchProgram decompose_extended(const ExtendedPermutation& ep, bool tail_drop) {
  size_t m = ep.sources;
  size_t n = ep.src.size();
  SwitchProgram prog;
  prog.shape = build_shape(m, n, tail_drop);
  prog.source = ep.src;

  // first-occurrence layout: each distinct bin, then e-1 placeholders
  std::vector<u32> layout;
  layout.reserve(n);
  BitVec is_placeholder(n);
  std::unordered_map<u32, u32> group_start;  // bin -> start slot in layout
  std::vector<u32> group_fill;               // per output y, its slot
  group_fill.resize(n);
  {
    // multiplicity per bin
    std::unordered_map<u32, u32> mult;
    for (u32 b : ep.src) mult[b]++;
    std::unordered_map<u32, u32> used;
    for (size_t y = 0; y < n; ++y) {
      u32 b = ep.src[y];
      auto it = group_start.find(b);
      if (it == group_start.end()) {
        u32 start = u32(layout.size());
        group_start.emplace(b, start);
        layout.push_back(b);
        for (u32 k = 1; k < mult[b]; ++k) {
          is_placeholder.set(layout.size(), true);
          layout.push_back(0);  // filled from redundant bins below
        }
        group_fill[y] = start;
        used[b] = 1;
      } else {
        group_fill[y] = it->second + used[b];
        used[b]++;
      }
    }
  }
  if (layout.size() != n) throw std::logic_error("decompose: layout size mismatch");

  // placeholders and the tail absorb the redundant bins
  std::vector<u32> redundant;
  for (size_t b = 0; b < m; ++b)
    if (ep.bin_redundant.get(b)) redundant.push_back(u32(b));
  size_t next_red = 0;
  for (size_t p = 0; p < n; ++p)
    if (is_placeholder.get(p)) {
      if (next_red >= redundant.size()) throw std::logic_error("decompose: placeholder shortage");
      layout[p] = redundant[next_red++];
    }
  std::vector<u32> layout_full = layout;
  while (next_red < redundant.size()) layout_full.push_back(redundant[next_red++]);
  if (layout_full.size() != m) throw std::logic_error("decompose: source count mismatch");

  // phase 1: dummy placement over the padded source width
  BitVec b1 = route_opn(build_opn(prog.shape.m_pad), pad_identity(layout_full, prog.shape.m_pad));

  // phase 2: copy predecessor at each placeholder
  size_t rw = prog.shape.repl_width();
  BitVec b2(orn_switches(rw));
  for (size_t i = 0; i + 1 < rw; ++i)
    b2.set(i, i + 1 < n && is_placeholder.get(i + 1));

  // phase 3: replicated layout -> record order
  std::vector<u32> sigma3(n);
  for (size_t y = 0; y < n; ++y) sigma3[y] = group_fill[y];
  BitVec b3 = route_opn(build_opn(rw), pad_identity(sigma3, rw));

  prog.bits = BitVec(prog.shape.switches.size());
  size_t at = 0;
  for (size_t i = 0; i < b1.size(); ++i) prog.bits.set(at++, b1.get(i));
  for (size_t i = 0; i < b2.size(); ++i) prog.bits.set(at++, b2.get(i));
  for (size_t i = 0; i < b3.size(); ++i) prog.bits.set(at++, b3.get(i));
  return prog;
}

std::vector<u64> evaluate_plaintext(const SwitchProgram& prog, std::span<const u64> input) {
  const NetworkShape& s = prog.shape;
  if (input.size() != s.m_real) throw std::invalid_argument("evaluate: input length mismatch");
  std::vector<u64> x(s.m_pad, 0);
  std::copy(input.begin(), input.end(), x.begin());

  for (size_t i = 0; i < s.switches.size(); ++i) {
    const Switch& sw = s.switches[i];
    bool bit = prog.bits.get(i);
    if (sw.kind == SwitchKind::permutation) {
      if (bit) std::swap(x[sw.a], x[sw.b]);
    } else {
      if (bit) x[sw.b] = x[sw.a];
    }
  }
  x.resize(s.n_real);
  return x;
}

}  // namespace pprs
