#include "pprs/ofa/ofa.hpp"

#include <chrono>

namespace pprs {

namespace {

struct PhaseScope {
  Channel& ch;
  const OtStats& ot;
  PhaseCounters before;
  u64 ots_before;
  PhaseScope(Channel& c, const OtStats& o, const std::string& label) : ch(c), ot(o) {
    ch.counters().set_phase(label);
    before = ch.counters().totals();
    ots_before = o.logical_ots;
  }
  OfaPhaseStats finish() const {
    PhaseCounters now = ch.counters().totals();
    OfaPhaseStats s;
    s.bytes_sent = now.bytes_sent - before.bytes_sent;
    s.bytes_recv = now.bytes_recv - before.bytes_recv;
    s.rounds = now.rounds - before.rounds;
    s.ot_count = ot.logical_ots - ots_before;
    return s;
  }
};

size_t row_units(SwitchKind kind, bool partial_tables) {
  return (kind == SwitchKind::replication && partial_tables) ? 1 : 2;
}

}  // namespace

u64 OfaReport::total_bytes() const {
  u64 t = setup.bytes_sent + setup.bytes_recv;
  for (const auto& p : phase) t += p.bytes_sent + p.bytes_recv;
  return t;
}

u64 OfaReport::total_ots() const {
  u64 t = setup.ot_count;
  for (const auto& p : phase) t += p.ot_count;
  return t;
}

OfaOutput ofa_programmer(Channel& ch, OtService& ot, const SwitchProgram& prog,
                         const BitVec& input_share, const OfaOptions& opt) {
  const NetworkShape& shape = prog.shape;
  if (shape.tail_drop != opt.tail_drop)
    throw std::invalid_argument("ofa: program was decomposed with different tail_drop");
  if (input_share.size() != shape.m_real)
    throw std::invalid_argument("ofa: share length does not match program sources");
  auto t0 = std::chrono::steady_clock::now();

  OfaOutput out;
  out.report.options = opt;
  out.report.m_real = shape.m_real;
  out.report.n_real = shape.n_real;
  out.report.m_pad = shape.m_pad;
  out.report.n_pad = shape.n_pad;
  out.report.insecure_dealer = ot.insecure_dealer();

  size_t unit_bytes = opt.bit_payload ? 1 : 8;

  // blinded inputs from the labeler
  std::vector<u64> y(shape.m_pad, 0);
  {
    PhaseScope scope(ch, ot.stats(), "ofa:setup");
    Bytes blinded = ch.recv_frame(FrameType::OFA_BLINDED_INPUTS);
    if (opt.bit_payload) {
      BitVec v = BitVec::from_bytes(blinded, shape.m_pad);
      for (size_t i = 0; i < shape.m_pad; ++i) y[i] = v.get(i);
    } else {
      if (blinded.size() != shape.m_pad * 8) throw std::runtime_error("ofa: bad blinded inputs");
      for (size_t i = 0; i < shape.m_pad; ++i) y[i] = load64_le(blinded.data() + 8 * i);
    }
    out.report.setup = scope.finish();
  }

  size_t sw_base = 0;
  for (int ph = 0; ph < 3; ++ph) {
    size_t count = shape.phase_count[ph];
    PhaseScope scope(ch, ot.stats(), "ofa:phase" + std::to_string(ph));
    if (count > 0) {
      SwitchKind kind = shape.switches[sw_base].kind;
      size_t units = row_units(kind, opt.partial_tables);
      size_t msg_bytes = opt.bit_payload ? 1 : units * 8;

      BitVec choices(count);
      for (size_t i = 0; i < count; ++i) choices.set(i, prog.bits.get(sw_base + i));
      std::vector<u8> rows(count * msg_bytes);
      ot.recv(choices, rows.data(), msg_bytes);

      for (size_t i = 0; i < count; ++i) {
        const Switch& sw = shape.switches[sw_base + i];
        bool bit = choices.get(i);
        u64 t_top = 0, t_bot = 0;
        if (opt.bit_payload) {
          u8 r = rows[i];
          if (units == 2) {
            t_top = r & 1;
            t_bot = (r >> 1) & 1;
          } else {
            t_bot = r & 1;
          }
        } else {
          const u8* r = rows.data() + i * msg_bytes;
          if (units == 2) {
            t_top = load64_le(r);
            t_bot = load64_le(r + 8);
          } else {
            t_bot = load64_le(r);
          }
        }
        u64 ya = y[sw.a], yb = y[sw.b];
        if (sw.kind == SwitchKind::permutation) {
          y[sw.a] = (bit ? yb : ya) ^ t_top;
          y[sw.b] = (bit ? ya : yb) ^ t_bot;
        } else {
          if (units == 2) y[sw.a] = ya ^ t_top;  // partial tables leave the top wire as-is
          y[sw.b] = (bit ? ya : yb) ^ t_bot;
        }
      }
    }
    out.report.phase[ph] = scope.finish();
    sw_base += count;
  }

  // unblind with own permuted input share
  if (opt.bit_payload) {
    out.bits = BoolShares{0, BitVec(shape.n_real)};
    for (size_t i = 0; i < shape.n_real; ++i)
      out.bits.bits.set(i, (y[i] & 1) ^ input_share.get(prog.source[i]));
  } else {
    out.words.resize(shape.n_real);
    for (size_t i = 0; i < shape.n_real; ++i)
      out.words[i] = y[i] ^ (input_share.get(prog.source[i]) ? 1 : 0);
  }
  out.report.wall_micros = u64(std::chrono::duration_cast<std::chrono::microseconds>(
                                   std::chrono::steady_clock::now() - t0)
                                   .count());
  return out;
}

OfaOutput ofa_labeler(Channel& ch, OtService& ot, size_t m_real, size_t n_real,
                      const BitVec& input_share, const OfaOptions& opt, Prg rng) {
  NetworkShape shape = build_shape(m_real, n_real, opt.tail_drop);
  if (input_share.size() != m_real)
    throw std::invalid_argument("ofa: share length does not match sources");
  auto t0 = std::chrono::steady_clock::now();

  OfaOutput out;
  out.report.options = opt;
  out.report.m_real = m_real;
  out.report.n_real = n_real;
  out.report.m_pad = shape.m_pad;
  out.report.n_pad = shape.n_pad;
  out.report.insecure_dealer = ot.insecure_dealer();

  u64 labels = 0;
  auto fresh = [&]() -> u64 {
    ++labels;
    return opt.bit_payload ? (rng.next_u64() & 1) : rng.next_u64();
  };

  std::vector<u64> cur(shape.m_pad);
  for (auto& l : cur) l = fresh();

  {
    PhaseScope scope(ch, ot.stats(), "ofa:setup");
    if (opt.bit_payload) {
      BitVec blinded(shape.m_pad);
      for (size_t i = 0; i < shape.m_pad; ++i)
        blinded.set(i, ((i < m_real && input_share.get(i)) ? 1 : 0) ^ (cur[i] & 1));
      ch.send_frame(FrameType::OFA_BLINDED_INPUTS, blinded.to_bytes());
    } else {
      Bytes blinded(shape.m_pad * 8);
      for (size_t i = 0; i < shape.m_pad; ++i)
        store64_le(blinded.data() + 8 * i, ((i < m_real && input_share.get(i)) ? 1 : 0) ^ cur[i]);
      ch.send_frame(FrameType::OFA_BLINDED_INPUTS, blinded);
    }
    out.report.setup = scope.finish();
  }

  size_t sw_base = 0;
  for (int ph = 0; ph < 3; ++ph) {
    size_t count = shape.phase_count[ph];
    PhaseScope scope(ch, ot.stats(), "ofa:phase" + std::to_string(ph));
    if (count > 0) {
      SwitchKind kind = shape.switches[sw_base].kind;
      size_t units = row_units(kind, opt.partial_tables);
      size_t msg_bytes = opt.bit_payload ? 1 : units * 8;

      std::vector<u8> m0(count * msg_bytes), m1(count * msg_bytes);
      for (size_t i = 0; i < count; ++i) {
        const Switch& sw = shape.switches[sw_base + i];
        u64 la = cur[sw.a], lb = cur[sw.b];
        u64 ka, kb = fresh();
        u64 r0_top = 0, r0_bot = 0, r1_top = 0, r1_bot = 0;
        if (sw.kind == SwitchKind::permutation) {
          ka = fresh();
          r0_top = la ^ ka;
          r0_bot = lb ^ kb;
          r1_top = lb ^ ka;
          r1_bot = la ^ kb;
        } else if (units == 2) {
          // full replication table: top column identical in both rows
          ka = fresh();
          r0_top = la ^ ka;
          r0_bot = lb ^ kb;
          r1_top = la ^ ka;
          r1_bot = la ^ kb;
        } else {
          // partial table: the top output equals the top input verbatim
          ka = la;
          r0_bot = lb ^ kb;
          r1_bot = la ^ kb;
        }
        if (opt.bit_payload) {
          m0[i] = units == 2 ? u8((r0_top & 1) | ((r0_bot & 1) << 1)) : u8(r0_bot & 1);
          m1[i] = units == 2 ? u8((r1_top & 1) | ((r1_bot & 1) << 1)) : u8(r1_bot & 1);
        } else {
          u8* p0 = m0.data() + i * msg_bytes;
          u8* p1 = m1.data() + i * msg_bytes;
          if (units == 2) {
            store64_le(p0, r0_top);
            store64_le(p0 + 8, r0_bot);
            store64_le(p1, r1_top);
            store64_le(p1 + 8, r1_bot);
          } else {
            store64_le(p0, r0_bot);
            store64_le(p1, r1_bot);
          }
        }
        cur[sw.a] = ka;
        cur[sw.b] = kb;
      }
      ot.send(m0.data(), m1.data(), count, msg_bytes);
    }
    out.report.phase[ph] = scope.finish();
    sw_base += count;
  }

  // final labels are this party's output shares
  out.report.labels_generated = labels;
  if (opt.bit_payload) {
    out.bits = BoolShares{1, BitVec(n_real)};
    for (size_t i = 0; i < n_real; ++i) out.bits.bits.set(i, cur[i] & 1);
  } else {
    out.words.assign(cur.begin(), cur.begin() + n_real);
  }
  out.report.wall_micros = u64(std::chrono::duration_cast<std::chrono::microseconds>(
                                   std::chrono::steady_clock::now() - t0)
                                   .count());
  return out;
}

}  // namespace pprs
