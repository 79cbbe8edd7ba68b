#include "pprs/crypto/chacha.hpp"

namespace pprs {

namespace {

inline void quarter_round(u32& a, u32& b, u32& c, u32& d) {
  a += b; d ^= a; d = rotl32(d, 16);
  c += d; b ^= c; b = rotl32(b, 12);
  a += b; d ^= a; d = rotl32(d, 8);
  c += d; b ^= c; b = rotl32(b, 7);
}

}  // namespace

void chacha20_block(const u32 key[8], u64 counter, u64 nonce, u8 out[64]) {
  // "expand 32-byte k"
  u32 st[16] = {0x61707865, 0x3320646e, 0x79622d32, 0x6b206574,
                key[0],     key[1],     key[2],     key[3],
                key[4],     key[5],     key[6],     key[7],
                u32(counter), u32(counter >> 32), u32(nonce), u32(nonce >> 32)};
  u32 x[16];
  for (int i = 0; i < 16; ++i) x[i] = st[i];
  for (int round = 0; round < 10; ++round) {
    quarter_round(x[0], x[4], x[8], x[12]);
    quarter_round(x[1], x[5], x[9], x[13]);
    quarter_round(x[2], x[6], x[10], x[14]);
    quarter_round(x[3], x[7], x[11], x[15]);
    quarter_round(x[0], x[5], x[10], x[15]);
    quarter_round(x[1], x[6], x[11], x[12]);
    quarter_round(x[2], x[7], x[8], x[13]);
    quarter_round(x[3], x[4], x[9], x[14]);
  }
  for (int i = 0; i < 16; ++i) {
    u32 v = x[i] + st[i];
    out[4 * i + 0] = u8(v);
    out[4 * i + 1] = u8(v >> 8);
    out[4 * i + 2] = u8(v >> 16);
    out[4 * i + 3] = u8(v >> 24);
  }
}

Prg::Prg(u64 seed) {
  store64_le(seed_.data(), seed);
}

Prg::Prg(const std::array<u8, 32>& seed) : seed_(seed) {}

Prg::Prg(const u8* seed32, u64 nonce) : nonce_(nonce) {
  std::memcpy(seed_.data(), seed32, 32);
}

void Prg::refill() {
  u32 key[8];
  for (int i = 0; i < 8; ++i) {
    key[i] = u32(seed_[4 * i]) | (u32(seed_[4 * i + 1]) << 8) | (u32(seed_[4 * i + 2]) << 16) |
             (u32(seed_[4 * i + 3]) << 24);
  }
  chacha20_block(key, counter_++, nonce_, buf_);
  pos_ = 0;
}

void Prg::fill(void* dst, size_t n) {
  u8* p = static_cast<u8*>(dst);
  while (n > 0) {
    if (pos_ == 64) refill();
    size_t take = std::min<size_t>(64 - pos_, n);
    std::memcpy(p, buf_ + pos_, take);
    pos_ += take;
    p += take;
    n -= take;
  }
}

u64 Prg::next_u64() {
  u8 b[8];
  fill(b, 8);
  return load64_le(b);
}

u64 Prg::next_below(u64 bound) {
  if (bound == 0) throw std::invalid_argument("next_below: zero bound");
  u64 lim = ~u64(0) - (~u64(0) % bound);
  for (;;) {
    u64 v = next_u64();
    if (v < lim) return v % bound;
  }
}

BitVec Prg::next_bits(size_t n) {
  BitVec v(n);
  fill(v.data(), v.words() * 8);
  v.clear_tail();
  return v;
}

Prg Prg::derive(u64 label) const {
  // child key = ChaCha(seed, nonce=~label) block; keeps parents and children independent
  u32 key[8];
  for (int i = 0; i < 8; ++i) {
    key[i] = u32(seed_[4 * i]) | (u32(seed_[4 * i + 1]) << 8) | (u32(seed_[4 * i + 2]) << 16) |
             (u32(seed_[4 * i + 3]) << 24);
  }
  u8 block[64];
  chacha20_block(key, ~u64(0), label ^ ~nonce_, block);
  std::array<u8, 32> child{};
  std::memcpy(child.data(), block, 32);
  return Prg(child);
}

}  // namespace pprs
