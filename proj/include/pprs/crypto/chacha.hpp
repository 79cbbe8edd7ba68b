#pragma once

#include <array>

#include "pprs/util.hpp"

namespace pprs {

// ChaCha20 block function (djb variant: 64-bit counter, 64-bit nonce).
void chacha20_block(const u32 key[8], u64 counter, u64 nonce, u8 out[64]);

// Deterministic pseudorandom stream seeded by 32 bytes. Cheap to fork into
// domain-separated children via derive().
class Prg {
 public:
  Prg() : Prg(u64(0)) {}
  explicit Prg(u64 seed);
  explicit Prg(const std::array<u8, 32>& seed);
  Prg(const u8* seed32, u64 nonce);

  void fill(void* dst, size_t n);
  u64 next_u64();
  // uniform in [0, bound) via rejection
  u64 next_below(u64 bound);
  bool next_bit() { return next_u64() & 1; }
  BitVec next_bits(size_t n);

  // child stream keyed by (this seed, label); does not disturb this stream
  Prg derive(u64 label) const;

  const std::array<u8, 32>& seed() const { return seed_; }

 private:
  void refill();
  std::array<u8, 32> seed_{};
  u64 nonce_ = 0;
  u64 counter_ = 0;
  u8 buf_[64];
  size_t pos_ = 64;
};

}  // namespace pprs
