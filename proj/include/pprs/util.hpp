#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pprs {

using u8 = std::uint8_t;
using u16 = std::uint16_t;
using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;

using Bytes = std::vector<u8>;

inline u32 rotl32(u32 x, int r) { return (x << r) | (x >> (32 - r)); }
inline u64 rotl64(u64 x, int r) { return (x << r) | (x >> (64 - r)); }

inline u64 load64_le(const u8* p) {
  u64 x;
  std::memcpy(&x, p, 8);
  return x;  // little-endian hosts only; asserted in transport tests
}
inline void store64_le(u8* p, u64 x) { std::memcpy(p, &x, 8); }

inline u32 load32_be(const u8* p) {
  return (u32(p[0]) << 24) | (u32(p[1]) << 16) | (u32(p[2]) << 8) | u32(p[3]);
}
inline void store32_be(u8* p, u32 x) {
  p[0] = u8(x >> 24);
  p[1] = u8(x >> 16);
  p[2] = u8(x >> 8);
  p[3] = u8(x);
}

inline size_t next_pow2(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

inline unsigned log2_exact(size_t n) {
  unsigned k = 0;
  while ((size_t(1) << k) < n) ++k;
  if ((size_t(1) << k) != n) throw std::invalid_argument("log2_exact: not a power of two");
  return k;
}

// Packed bit vector, LSB-first within each 64-bit word.
class BitVec {
 public:
  BitVec() = default;
  explicit BitVec(size_t n) : n_(n), w_((n + 63) / 64, 0) {}

  size_t size() const { return n_; }
  size_t words() const { return w_.size(); }
  u64* data() { return w_.data(); }
  const u64* data() const { return w_.data(); }

  bool get(size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1; }
  void set(size_t i, bool b) {
    u64 m = u64(1) << (i & 63);
    if (b)
      w_[i >> 6] |= m;
    else
      w_[i >> 6] &= ~m;
  }

  void clear_tail() {
    if (n_ & 63) w_.back() &= (u64(1) << (n_ & 63)) - 1;
  }

  size_t popcount() const {
    size_t c = 0;
    for (u64 w : w_) c += size_t(__builtin_popcountll(w));
    return c;
  }

  BitVec& operator^=(const BitVec& o) {
    for (size_t i = 0; i < w_.size(); ++i) w_[i] ^= o.w_[i];
    return *this;
  }
  BitVec& operator&=(const BitVec& o) {
    for (size_t i = 0; i < w_.size(); ++i) w_[i] &= o.w_[i];
    return *this;
  }
  BitVec& operator|=(const BitVec& o) {
    for (size_t i = 0; i < w_.size(); ++i) w_[i] |= o.w_[i];
    return *this;
  }
  void flip_all() {
    for (auto& w : w_) w = ~w;
    clear_tail();
  }

  friend BitVec operator^(BitVec a, const BitVec& b) { return a ^= b; }
  friend BitVec operator&(BitVec a, const BitVec& b) { return a &= b; }

  bool operator==(const BitVec& o) const { return n_ == o.n_ && w_ == o.w_; }

  Bytes to_bytes() const {
    Bytes out((n_ + 7) / 8);
    for (size_t i = 0; i < out.size(); ++i) {
      u64 w = w_[i >> 3];
      out[i] = u8(w >> ((i & 7) * 8));
    }
    return out;
  }
  static BitVec from_bytes(const Bytes& b, size_t n) {
    if (b.size() < (n + 7) / 8) throw std::invalid_argument("BitVec::from_bytes: short buffer");
    BitVec v(n);
    for (size_t i = 0; i < (n + 7) / 8; ++i) v.w_[i >> 3] |= u64(b[i]) << ((i & 7) * 8);
    v.clear_tail();
    return v;
  }

 private:
  size_t n_ = 0;
  std::vector<u64> w_;
};

}  // namespace pprs
