#include "pprs/shares/shares.hpp"

namespace pprs {

BitVec reconstruct_bits(const BoolShares& a, const BoolShares& b) {
  if (a.party == b.party) throw std::invalid_argument("reconstruct: same party id");
  if (a.size() != b.size()) throw std::invalid_argument("reconstruct: length mismatch");
  return a.bits ^ b.bits;
}

std::vector<u64> reconstruct_ring(const ArithShares& a, const ArithShares& b) {
  if (a.party == b.party) throw std::invalid_argument("reconstruct: same party id");
  if (a.size() != b.size()) throw std::invalid_argument("reconstruct: length mismatch");
  std::vector<u64> out(a.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.elems[i] + b.elems[i];
  return out;
}

TriplePool TriplePool::fixed_boolean(std::vector<u64> a, std::vector<u64> b, std::vector<u64> c) {
  TriplePool p(Kind::boolean);
  p.ba_ = std::move(a);
  p.bb_ = std::move(b);
  p.bc_ = std::move(c);
  return p;
}

TriplePool TriplePool::fixed_arith(std::vector<u64> a, std::vector<u64> b, std::vector<u64> c) {
  TriplePool p(Kind::arithmetic);
  p.aa_ = std::move(a);
  p.ab_ = std::move(b);
  p.ac_ = std::move(c);
  return p;
}

size_t TriplePool::take_bool_words(size_t words) {
  if (kind_ != Kind::boolean) throw std::logic_error("triple pool kind mismatch");
  if (bool_cursor_ + words > ba_.size()) {
    if (!bool_refill_) throw std::runtime_error("boolean triple pool exhausted");
    size_t need = bool_cursor_ + words - ba_.size();
    bool_refill_(need, ba_, bb_, bc_);
    if (bool_cursor_ + words > ba_.size())
      throw std::runtime_error("boolean triple pool refill too small");
  }
  size_t at = bool_cursor_;
  bool_cursor_ += words;
  return at;
}

size_t TriplePool::take_arith(size_t count) {
  if (kind_ != Kind::arithmetic) throw std::logic_error("triple pool kind mismatch");
  if (arith_cursor_ + count > aa_.size()) throw std::runtime_error("arithmetic triple pool exhausted");
  size_t at = arith_cursor_;
  arith_cursor_ += count;
  return at;
}

void dealer_bool_triples(Prg& dealer, int party, size_t words, std::vector<u64>& a,
                         std::vector<u64>& b, std::vector<u64>& c) {
  for (size_t i = 0; i < words; ++i) {
    u64 a0 = dealer.next_u64(), a1 = dealer.next_u64();
    u64 b0 = dealer.next_u64(), b1 = dealer.next_u64();
    u64 c0 = dealer.next_u64();
    u64 c1 = ((a0 ^ a1) & (b0 ^ b1)) ^ c0;
    a.push_back(party == 0 ? a0 : a1);
    b.push_back(party == 0 ? b0 : b1);
    c.push_back(party == 0 ? c0 : c1);
  }
}

void dealer_arith_triples(Prg& dealer, int party, size_t count, std::vector<u64>& a,
                          std::vector<u64>& b, std::vector<u64>& c) {
  for (size_t i = 0; i < count; ++i) {
    u64 a0 = dealer.next_u64(), a1 = dealer.next_u64();
    u64 b0 = dealer.next_u64(), b1 = dealer.next_u64();
    u64 c0 = dealer.next_u64();
    u64 c1 = (a0 + a1) * (b0 + b1) - c0;
    a.push_back(party == 0 ? a0 : a1);
    b.push_back(party == 0 ? b0 : b1);
    c.push_back(party == 0 ? c0 : c1);
  }
}

void ot_bool_triples(int party, Channel& ch, OtService& ot, Prg& rng, size_t words,
                     std::vector<u64>& a, std::vector<u64>& b, std::vector<u64>& c) {
  (void)ch;
  size_t n = words * 64;
  BitVec am = rng.next_bits(n), bm = rng.next_bits(n);
  BitVec r = rng.next_bits(n);

  // cross terms a0&b1 and a1&b0, one OT direction each; 1-byte messages
  Bytes m0(n), m1(n), got(n);
  auto run_as_sender = [&]() {
    for (size_t j = 0; j < n; ++j) {
      m0[j] = r.get(j) ? 1 : 0;              // (a & 0) ^ r
      m1[j] = u8((am.get(j) ^ r.get(j)) ? 1 : 0);  // (a & 1) ^ r
    }
    ot.send(m0.data(), m1.data(), n, 1);
  };
  auto run_as_receiver = [&]() { ot.recv(bm, got.data(), 1); };

  if (party == 0) {
    run_as_sender();
    run_as_receiver();
  } else {
    run_as_receiver();
    run_as_sender();
  }

  for (size_t w = 0; w < words; ++w) {
    u64 aw = am.data()[w], bw = bm.data()[w], rw = r.data()[w];
    u64 uw = 0;
    for (size_t k = 0; k < 64; ++k)
      if (got[w * 64 + k] & 1) uw |= u64(1) << k;
    a.push_back(aw);
    b.push_back(bw);
    c.push_back((aw & bw) ^ rw ^ uw);
  }
}

GateCtx::GateCtx(int party, Channel& ch, OtService& ot, TriplePool& pool, Prg rng)
    : party_(party), ch_(ch), ot_(ot), pool_(pool), rng_(rng) {}

BoolShares GateCtx::input_bits(int owner, const BitVec* plaintext, size_t n) {
  if (party_ == owner) {
    if (!plaintext || plaintext->size() != n)
      throw std::invalid_argument("input_bits: announced/supplied length mismatch");
    BitVec r = rng_.next_bits(n);
    ch_.send_frame(FrameType::GATE_ROUND, r.to_bytes());
    BitVec mine = *plaintext;
    mine ^= r;
    return BoolShares{party_, std::move(mine)};
  }
  Bytes rb = ch_.recv_frame(FrameType::GATE_ROUND);
  return BoolShares{party_, BitVec::from_bytes(rb, n)};
}

ArithShares GateCtx::input_ring(int owner, const std::vector<u64>* plaintext, size_t n) {
  if (party_ == owner) {
    if (!plaintext || plaintext->size() != n)
      throw std::invalid_argument("input_ring: announced/supplied length mismatch");
    std::vector<u64> r(n);
    rng_.fill(r.data(), n * 8);
    Bytes payload(n * 8);
    std::memcpy(payload.data(), r.data(), n * 8);
    ch_.send_frame(FrameType::GATE_ROUND, payload);
    std::vector<u64> mine(n);
    for (size_t i = 0; i < n; ++i) mine[i] = (*plaintext)[i] - r[i];
    return ArithShares{party_, std::move(mine)};
  }
  Bytes payload = ch_.recv_frame(FrameType::GATE_ROUND);
  if (payload.size() != n * 8) throw std::invalid_argument("input_ring: length mismatch");
  std::vector<u64> r(n);
  std::memcpy(r.data(), payload.data(), n * 8);
  return ArithShares{party_, std::move(r)};
}

BitVec GateCtx::reveal(const BoolShares& s) {
  ch_.send_frame(FrameType::REVEAL, s.bits.to_bytes());
  Bytes peer = ch_.recv_frame(FrameType::REVEAL);
  BitVec out = BitVec::from_bytes(peer, s.size());
  out ^= s.bits;
  reveal_calls_++;
  revealed_values_ += s.size();
  return out;
}

std::vector<u64> GateCtx::reveal(const ArithShares& s) {
  Bytes payload(s.size() * 8);
  std::memcpy(payload.data(), s.elems.data(), payload.size());
  ch_.send_frame(FrameType::REVEAL, payload);
  Bytes peer = ch_.recv_frame(FrameType::REVEAL);
  if (peer.size() != payload.size()) throw std::runtime_error("reveal: length mismatch");
  std::vector<u64> out(s.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = s.elems[i] + load64_le(peer.data() + 8 * i);
  reveal_calls_++;
  revealed_values_ += s.size();
  return out;
}

BoolShares GateCtx::xor_shares(const BoolShares& x, const BoolShares& y) {
  if (x.size() != y.size()) throw std::invalid_argument("xor: length mismatch");
  BoolShares z{x.party, x.bits};
  z.bits ^= y.bits;
  return z;
}

BoolShares GateCtx::not_local(const BoolShares& x) const {
  BoolShares z = x;
  if (party_ == 0) z.bits.flip_all();
  return z;
}

BoolShares GateCtx::and_batch(const BoolShares& x, const BoolShares& y, FrameType tag) {
  if (x.size() != y.size()) throw std::invalid_argument("and_batch: length mismatch");
  size_t n = x.size();
  size_t words = x.bits.words();
  size_t at = pool_.take_bool_words(words);
  const u64* ta = pool_.bool_a() + at;
  const u64* tb = pool_.bool_b() + at;
  const u64* tc = pool_.bool_c() + at;

  // open d = x ^ a, e = y ^ b in one round
  Bytes payload(words * 16);
  for (size_t w = 0; w < words; ++w) {
    store64_le(payload.data() + 8 * w, x.bits.data()[w] ^ ta[w]);
    store64_le(payload.data() + 8 * (words + w), y.bits.data()[w] ^ tb[w]);
  }
  ch_.send_frame(tag, payload);
  Bytes peer = ch_.recv_frame(tag);
  if (peer.size() != payload.size()) throw std::runtime_error("and_batch: bad round payload");

  BoolShares z{party_, BitVec(n)};
  for (size_t w = 0; w < words; ++w) {
    u64 d = x.bits.data()[w] ^ ta[w] ^ load64_le(peer.data() + 8 * w);
    u64 e = y.bits.data()[w] ^ tb[w] ^ load64_le(peer.data() + 8 * (words + w));
    u64 zw = tc[w] ^ (d & tb[w]) ^ (e & ta[w]);
    if (party_ == 0) zw ^= d & e;
    z.bits.data()[w] = zw;
  }
  z.bits.clear_tail();
  return z;
}

BoolShares GateCtx::or_batch(const BoolShares& x, const BoolShares& y, FrameType tag) {
  // x | y = (x & y) ^ x ^ y
  BoolShares z = and_batch(x, y, tag);
  z.bits ^= x.bits;
  z.bits ^= y.bits;
  return z;
}

ArithShares GateCtx::mux(const ArithShares& w, const BoolShares& b) {
  if (w.size() != b.size()) throw std::invalid_argument("mux: length mismatch");
  size_t n = w.size();
  std::vector<u64> mask(n);
  rng_.fill(mask.data(), n * 8);

  Bytes m0(n * 8), m1(n * 8), got(n * 8);
  auto build = [&]() {
    // message for receiver bit c: ((b_mine ^ c) ? w_mine : 0) - mask
    for (size_t j = 0; j < n; ++j) {
      bool bj = b.bits.get(j);
      u64 v0 = (bj ? w.elems[j] : 0) - mask[j];
      u64 v1 = (!bj ? w.elems[j] : 0) - mask[j];
      store64_le(m0.data() + 8 * j, v0);
      store64_le(m1.data() + 8 * j, v1);
    }
  };

  ArithShares z{party_, std::vector<u64>(n)};
  if (party_ == 0) {
    build();
    ot_.send(m0.data(), m1.data(), n, 8);
    ot_.recv(b.bits, got.data(), 8);
  } else {
    ot_.recv(b.bits, got.data(), 8);
    build();
    ot_.send(m0.data(), m1.data(), n, 8);
  }
  for (size_t j = 0; j < n; ++j) z.elems[j] = mask[j] + load64_le(got.data() + 8 * j);
  return z;
}

ArithShares GateCtx::b2a(const BoolShares& b) {
  size_t n = b.size();
  ArithShares z{party_, std::vector<u64>(n)};
  if (party_ == 0) {
    std::vector<u64> mask(n);
    rng_.fill(mask.data(), n * 8);
    Bytes m0(n * 8), m1(n * 8);
    for (size_t j = 0; j < n; ++j) {
      u64 bj = b.bits.get(j) ? 1 : 0;
      store64_le(m0.data() + 8 * j, bj - mask[j]);
      store64_le(m1.data() + 8 * j, (bj ^ 1) - mask[j]);
    }
    ot_.send(m0.data(), m1.data(), n, 8);
    z.elems = std::move(mask);
  } else {
    Bytes got(n * 8);
    ot_.recv(b.bits, got.data(), 8);
    for (size_t j = 0; j < n; ++j) z.elems[j] = load64_le(got.data() + 8 * j);
  }
  return z;
}

namespace {

void copy_bits(BitVec& dst, size_t dst_off, const BitVec& src, size_t src_off, size_t len) {
  for (size_t i = 0; i < len; ++i) dst.set(dst_off + i, src.get(src_off + i));
}

}  // namespace

BoolShares GateCtx::msb(const ArithShares& x, unsigned width) {
  if (width == 0 || width > 64) throw std::invalid_argument("msb: bad width");
  size_t n = x.size();
  BoolShares out{party_, BitVec(n)};

  // own-share bit planes; the peer's planes enter as zero shares
  std::vector<BitVec> mine(width, BitVec(n));
  for (size_t j = 0; j < n; ++j) {
    u64 v = x.elems[j];
    for (unsigned i = 0; i < width; ++i)
      if ((v >> i) & 1) mine[i].set(j, true);
  }
  if (width == 1) {
    out.bits = mine[0];
    return out;
  }

  unsigned lo = width - 1;  // planes 0..width-2 feed the carry into the sign bit
  BitVec zero(n);
  auto plane_share = [&](unsigned i, int owner) -> const BitVec& {
    return party_ == owner ? mine[i] : zero;
  };

  // generate/propagate planes: g = a&b (one batched AND), p = a^b (local)
  BoolShares acat{party_, BitVec(lo * n)}, bcat{party_, BitVec(lo * n)};
  for (unsigned i = 0; i < lo; ++i) {
    copy_bits(acat.bits, i * n, plane_share(i, 0), 0, n);
    copy_bits(bcat.bits, i * n, plane_share(i, 1), 0, n);
  }
  BoolShares gcat = and_batch(acat, bcat);
  std::vector<BitVec> g(lo, BitVec(n)), p(lo, BitVec(n));
  for (unsigned i = 0; i < lo; ++i) {
    copy_bits(g[i], 0, gcat.bits, i * n, n);
    p[i] = plane_share(i, 0) ^ plane_share(i, 1);
  }

  // parallel-prefix combine, G/P updates batched into one AND per level
  for (unsigned k = 1; k < lo; k <<= 1) {
    unsigned m = lo - k;
    BoolShares left{party_, BitVec(2 * m * n)}, right{party_, BitVec(2 * m * n)};
    for (unsigned i = k; i < lo; ++i) {
      size_t slot = (i - k) * n;
      copy_bits(left.bits, slot, p[i], 0, n);
      copy_bits(right.bits, slot, g[i - k], 0, n);
      copy_bits(left.bits, m * n + slot, p[i], 0, n);
      copy_bits(right.bits, m * n + slot, p[i - k], 0, n);
    }
    BoolShares res = and_batch(left, right);
    for (unsigned i = k; i < lo; ++i) {
      size_t slot = (i - k) * n;
      BitVec upd(n);
      copy_bits(upd, 0, res.bits, slot, n);
      g[i] ^= upd;
      copy_bits(p[i], 0, res.bits, m * n + slot, n);
    }
  }

  // sign = a_{w-1} ^ b_{w-1} ^ carry_in, carry_in = prefix generate of bits 0..w-2
  out.bits = mine[width - 1];
  out.bits ^= g[lo - 1];
  return out;
}

}  // namespace pprs
