#include "pprs/ot/ot.hpp"

#include "pprs/crypto/edwards.hpp"

namespace pprs {

namespace {

constexpr size_t kChunkBytes = 4ull * 1024 * 1024;
constexpr size_t kExtMinBlock = 1ull << 14;

// 64x64 bit-matrix transpose, LSB-first: bit j of x[i] moves to bit i of
// x[j]. The core routine anti-transposes (MSB-first convention); the row
// reversals turn it into the straight transpose.
void transpose64(u64 x[64]) {
  std::reverse(x, x + 64);
  u64 m = 0x00000000FFFFFFFFull;
  for (int j = 32; j != 0; j >>= 1, m ^= m << j) {
    for (int k = 0; k < 64; k = (k + j + 1) & ~j) {
      u64 t = (x[k] ^ (x[k + j] >> j)) & m;
      x[k] ^= t;
      x[k + j] ^= t << j;
    }
  }
  std::reverse(x, x + 64);
}

inline void expand_pad(const std::array<u8, 32>& key, u64 nonce, u8* dst, size_t n) {
  Prg(key.data(), nonce).fill(dst, n);
}

}  // namespace

const char* ot_mode_name(OtMode m) {
  switch (m) {
    case OtMode::dealer: return "dealer";
    case OtMode::extended: return "extended";
    case OtMode::base: return "base";
  }
  return "?";
}

OtMode ot_mode_from_name(const std::string& s) {
  if (s == "dealer") return OtMode::dealer;
  if (s == "extended") return OtMode::extended;
  if (s == "base") return OtMode::base;
  throw std::invalid_argument("unknown OT mode: " + s);
}

void base_ot_send(Channel& ch, Prg& rng, size_t count, std::vector<std::array<u8, 32>>& key0,
                  std::vector<std::array<u8, 32>>& key1, OtStats& stats) {
  ec::Scalar a = ec::random_scalar(rng);
  ec::Point big_a = ec::scalar_mul(a, ec::base_point());
  ec::Point a_big_a = ec::scalar_mul(a, big_a);
  ec::EncodedPoint enc_a = ec::encode(big_a);
  ch.send_frame(FrameType::OT_MSG2, enc_a.data(), enc_a.size());

  Bytes bs = ch.recv_frame(FrameType::OT_MSG1);
  if (bs.size() != count * 32) throw std::runtime_error("base OT: transcript truncation");
  key0.resize(count);
  key1.resize(count);
  ec::Point neg_a_big_a = ec::negate(a_big_a);
  for (size_t j = 0; j < count; ++j) {
    ec::EncodedPoint e{};
    std::memcpy(e.data(), bs.data() + 32 * j, 32);
    auto b = ec::decode(e);
    if (!b) throw std::runtime_error("base OT: malformed group element");
    ec::Point p = ec::scalar_mul(a, *b);
    key0[j] = ec::encode(p);
    key1[j] = ec::encode(ec::add(p, neg_a_big_a));
  }
  stats.base_ot_instances += count;
}

void base_ot_recv(Channel& ch, Prg& rng, const BitVec& choices,
                  std::vector<std::array<u8, 32>>& key, OtStats& stats) {
  size_t count = choices.size();
  Bytes enc_a = ch.recv_frame(FrameType::OT_MSG2);
  if (enc_a.size() != 32) throw std::runtime_error("base OT: transcript truncation");
  ec::EncodedPoint ea{};
  std::memcpy(ea.data(), enc_a.data(), 32);
  auto big_a = ec::decode(ea);
  if (!big_a) throw std::runtime_error("base OT: malformed group element");

  Bytes bs(count * 32);
  key.resize(count);
  for (size_t j = 0; j < count; ++j) {
    ec::Scalar b = ec::random_scalar(rng);
    ec::Point pb = ec::scalar_mul(b, ec::base_point());
    if (choices.get(j)) pb = ec::add(pb, *big_a);
    ec::EncodedPoint e = ec::encode(pb);
    std::memcpy(bs.data() + 32 * j, e.data(), 32);
    key[j] = ec::encode(ec::scalar_mul(b, *big_a));
  }
  ch.send_frame(FrameType::OT_MSG1, bs);
  stats.base_ot_instances += count;
}

OtService::OtService(OtMode mode, int party, Channel& ch, Prg rng, std::optional<Prg> dealer_stream)
    : mode_(mode), party_(party), ch_(ch), rng_(rng), dealer_(std::move(dealer_stream)) {
  if (mode_ == OtMode::dealer && !dealer_)
    throw std::invalid_argument("dealer OT mode requires the shared dealer stream");
}

void OtService::ensure_send(size_t count) {
  if (mode_ == OtMode::dealer) {
    // streamed per transfer: both parties walk the shared stream in lockstep
    send_pool_.clear();
    send_cursor_ = 0;
    for (size_t i = 0; i < count; ++i) {
      u8 draw[65];
      dealer_->fill(draw, sizeof draw);
      SendEntry se;
      std::memcpy(se.key0.data(), draw + 1, 32);
      std::memcpy(se.key1.data(), draw + 33, 32);
      se.nonce = send_nonce_++;
      send_pool_.push_back(se);
    }
    return;
  }
  if (send_pool_.size() - send_cursor_ >= count) return;
  size_t need = count - (send_pool_.size() - send_cursor_);
  send_pool_.erase(send_pool_.begin(), send_pool_.begin() + send_cursor_);
  send_cursor_ = 0;
  if (mode_ == OtMode::base)
    base_fill_send(need);
  else
    ext_fill_send(need);
}

void OtService::ensure_recv(size_t count) {
  if (mode_ == OtMode::dealer) {
    recv_pool_.clear();
    recv_cursor_ = 0;
    for (size_t i = 0; i < count; ++i) {
      u8 draw[65];
      dealer_->fill(draw, sizeof draw);
      RecvEntry re;
      re.choice = draw[0] & 1;
      std::memcpy(re.key.data(), draw + (re.choice ? 33 : 1), 32);
      re.nonce = send_nonce_++;
      recv_pool_.push_back(re);
    }
    return;
  }
  if (recv_pool_.size() - recv_cursor_ >= count) return;
  size_t need = count - (recv_pool_.size() - recv_cursor_);
  recv_pool_.erase(recv_pool_.begin(), recv_pool_.begin() + recv_cursor_);
  recv_cursor_ = 0;
  if (mode_ == OtMode::base)
    base_fill_recv(need);
  else
    ext_fill_recv(need);
}

void OtService::base_fill_send(size_t count) {
  std::vector<std::array<u8, 32>> k0, k1;
  base_ot_send(ch_, rng_, count, k0, k1, stats_);
  for (size_t j = 0; j < count; ++j)
    send_pool_.push_back(SendEntry{k0[j], k1[j], send_nonce_++});
}

void OtService::base_fill_recv(size_t count) {
  BitVec c = rng_.next_bits(count);
  std::vector<std::array<u8, 32>> k;
  base_ot_recv(ch_, rng_, c, k, stats_);
  for (size_t j = 0; j < count; ++j)
    recv_pool_.push_back(RecvEntry{k[j], c.get(j), recv_nonce_++});
}

void OtService::ext_fill_send(size_t count) {
  if (!ext_send_seeded_) {
    // extension sender plays base-OT receiver for its lambda seed choices
    ext_s_ = rng_.next_bits(kOtLambda);
    base_ot_recv(ch_, rng_, ext_s_, ext_send_seed_, stats_);
    ext_send_seeded_ = true;
  }
  size_t m = ((std::max(count, kExtMinBlock) + 63) / 64) * 64;
  size_t words = m / 64;
  u64 block_tag = 0x1000 + ext_send_block_++;

  Bytes u_cols = ch_.recv_frame(FrameType::OT_MSG1);
  if (u_cols.size() != kOtLambda * words * 8)
    throw std::runtime_error("OT extension: bad column block size");

  std::vector<u64> q(kOtLambda * words);
  for (size_t i = 0; i < kOtLambda; ++i) {
    Prg prg(ext_send_seed_[i].data(), block_tag);
    prg.fill(&q[i * words], words * 8);
    if (ext_s_.get(i)) {
      const u8* uc = u_cols.data() + i * words * 8;
      for (size_t w = 0; w < words; ++w) q[i * words + w] ^= load64_le(uc + w * 8);
    }
  }
  // transpose columns into per-instance rows of lambda bits
  u8 s_bytes[16];
  {
    BitVec tmp = ext_s_;
    auto sb = tmp.to_bytes();
    std::memcpy(s_bytes, sb.data(), 16);
  }
  std::vector<u64> blk(64);
  for (size_t wb = 0; wb < words; ++wb) {
    std::array<std::array<u8, 16>, 64> rows{};
    for (size_t half = 0; half < 2; ++half) {
      for (size_t i = 0; i < 64; ++i) blk[i] = q[(half * 64 + i) * words + wb];
      transpose64(blk.data());
      for (size_t r = 0; r < 64; ++r) store64_le(rows[r].data() + half * 8, blk[r]);
    }
    for (size_t r = 0; r < 64; ++r) {
      SendEntry se;
      se.key0.fill(0);
      se.key1.fill(0);
      std::memcpy(se.key0.data(), rows[r].data(), 16);
      for (int t = 0; t < 16; ++t) se.key1[t] = rows[r][t] ^ s_bytes[t];
      se.nonce = send_nonce_++;
      send_pool_.push_back(se);
    }
  }
}

void OtService::ext_fill_recv(size_t count) {
  if (!ext_recv_seeded_) {
    // extension receiver plays base-OT sender of seed pairs
    base_ot_send(ch_, rng_, kOtLambda, ext_recv_seed0_, ext_recv_seed1_, stats_);
    ext_recv_seeded_ = true;
  }
  size_t m = ((std::max(count, kExtMinBlock) + 63) / 64) * 64;
  size_t words = m / 64;
  u64 block_tag = 0x1000 + ext_recv_block_++;

  BitVec r = rng_.next_bits(m);
  std::vector<u64> t_cols(kOtLambda * words);
  Bytes u_cols(kOtLambda * words * 8);
  for (size_t i = 0; i < kOtLambda; ++i) {
    Prg p0(ext_recv_seed0_[i].data(), block_tag);
    p0.fill(&t_cols[i * words], words * 8);
    Prg p1(ext_recv_seed1_[i].data(), block_tag);
    u8* uc = u_cols.data() + i * words * 8;
    p1.fill(uc, words * 8);
    for (size_t w = 0; w < words; ++w) {
      u64 u = load64_le(uc + w * 8) ^ t_cols[i * words + w] ^ r.data()[w];
      store64_le(uc + w * 8, u);
    }
  }
  ch_.send_frame(FrameType::OT_MSG1, u_cols);

  std::vector<u64> blk(64);
  for (size_t wb = 0; wb < words; ++wb) {
    std::array<std::array<u8, 16>, 64> rows{};
    for (size_t half = 0; half < 2; ++half) {
      for (size_t i = 0; i < 64; ++i) blk[i] = t_cols[(half * 64 + i) * words + wb];
      transpose64(blk.data());
      for (size_t rr = 0; rr < 64; ++rr) store64_le(rows[rr].data() + half * 8, blk[rr]);
    }
    for (size_t rr = 0; rr < 64; ++rr) {
      RecvEntry re;
      re.key.fill(0);
      std::memcpy(re.key.data(), rows[rr].data(), 16);
      re.choice = r.get(wb * 64 + rr);
      re.nonce = recv_nonce_++;
      recv_pool_.push_back(re);
    }
  }
}

void OtService::send(const u8* m0, const u8* m1, size_t count, size_t msg_bytes) {
  if (count == 0) return;
  ensure_send(count);
  stats_.logical_ots += count;

  Bytes e_bytes = ch_.recv_frame(FrameType::OT_CORRECTION);
  BitVec e = BitVec::from_bytes(e_bytes, count);

  size_t chunk = std::max<size_t>(1, kChunkBytes / (2 * msg_bytes));
  std::vector<u8> pad(msg_bytes);
  for (size_t off = 0; off < count; off += chunk) {
    size_t cnt = std::min(chunk, count - off);
    Bytes x(2 * cnt * msg_bytes);
    for (size_t j = 0; j < cnt; ++j) {
      const SendEntry& se = send_pool_[send_cursor_ + off + j];
      bool ej = e.get(off + j);
      // x_b = m_b ^ pad_{b ^ e}
      expand_pad(ej ? se.key1 : se.key0, se.nonce, pad.data(), msg_bytes);
      u8* x0 = x.data() + j * msg_bytes;
      const u8* s0 = m0 + (off + j) * msg_bytes;
      for (size_t t = 0; t < msg_bytes; ++t) x0[t] = s0[t] ^ pad[t];
      expand_pad(ej ? se.key0 : se.key1, se.nonce, pad.data(), msg_bytes);
      u8* x1 = x.data() + (cnt + j) * msg_bytes;
      const u8* s1 = m1 + (off + j) * msg_bytes;
      for (size_t t = 0; t < msg_bytes; ++t) x1[t] = s1[t] ^ pad[t];
    }
    ch_.send_frame(FrameType::OT_MSG2, x);
  }
  send_cursor_ += count;
}

void OtService::recv(const BitVec& choices, u8* out, size_t msg_bytes) {
  size_t count = choices.size();
  if (count == 0) return;
  ensure_recv(count);
  stats_.logical_ots += count;

  BitVec e(count);
  for (size_t j = 0; j < count; ++j)
    e.set(j, choices.get(j) ^ recv_pool_[recv_cursor_ + j].choice);
  ch_.send_frame(FrameType::OT_CORRECTION, e.to_bytes());

  size_t chunk = std::max<size_t>(1, kChunkBytes / (2 * msg_bytes));
  std::vector<u8> pad(msg_bytes);
  for (size_t off = 0; off < count; off += chunk) {
    size_t cnt = std::min(chunk, count - off);
    Bytes x = ch_.recv_frame(FrameType::OT_MSG2);
    if (x.size() != 2 * cnt * msg_bytes) throw std::runtime_error("OT: bad message block size");
    for (size_t j = 0; j < cnt; ++j) {
      const RecvEntry& re = recv_pool_[recv_cursor_ + off + j];
      expand_pad(re.key, re.nonce, pad.data(), msg_bytes);
      const u8* xc = x.data() + (choices.get(off + j) ? cnt + j : j) * msg_bytes;
      u8* dst = out + (off + j) * msg_bytes;
      for (size_t t = 0; t < msg_bytes; ++t) dst[t] = xc[t] ^ pad[t];
    }
  }
  recv_cursor_ += count;
}

}  // namespace pprs
