#include "pprs/crypto/siphash.hpp"

namespace pprs {

namespace {

inline void sipround(u64& v0, u64& v1, u64& v2, u64& v3) {
  v0 += v1; v1 = rotl64(v1, 13); v1 ^= v0; v0 = rotl64(v0, 32);
  v2 += v3; v3 = rotl64(v3, 16); v3 ^= v2;
  v0 += v3; v3 = rotl64(v3, 21); v3 ^= v0;
  v2 += v1; v1 = rotl64(v1, 17); v1 ^= v2; v2 = rotl64(v2, 32);
}

}  // namespace

u64 siphash24(u64 k0, u64 k1, const void* data, size_t len) {
  const u8* p = static_cast<const u8*>(data);
  u64 v0 = k0 ^ 0x736f6d6570736575ULL;
  u64 v1 = k1 ^ 0x646f72616e646f6dULL;
  u64 v2 = k0 ^ 0x6c7967656e657261ULL;
  u64 v3 = k1 ^ 0x7465646279746573ULL;

  size_t blocks = len / 8;
  for (size_t i = 0; i < blocks; ++i) {
    u64 m = load64_le(p + 8 * i);
    v3 ^= m;
    sipround(v0, v1, v2, v3);
    sipround(v0, v1, v2, v3);
    v0 ^= m;
  }
  u64 last = u64(len & 0xff) << 56;
  const u8* tail = p + 8 * blocks;
  switch (len & 7) {
    case 7: last |= u64(tail[6]) << 48; [[fallthrough]];
    case 6: last |= u64(tail[5]) << 40; [[fallthrough]];
    case 5: last |= u64(tail[4]) << 32; [[fallthrough]];
    case 4: last |= u64(tail[3]) << 24; [[fallthrough]];
    case 3: last |= u64(tail[2]) << 16; [[fallthrough]];
    case 2: last |= u64(tail[1]) << 8; [[fallthrough]];
    case 1: last |= u64(tail[0]); break;
    case 0: break;
  }
  v3 ^= last;
  sipround(v0, v1, v2, v3);
  sipround(v0, v1, v2, v3);
  v0 ^= last;
  v2 ^= 0xff;
  sipround(v0, v1, v2, v3);
  sipround(v0, v1, v2, v3);
  sipround(v0, v1, v2, v3);
  sipround(v0, v1, v2, v3);
  return v0 ^ v1 ^ v2 ^ v3;
}

}  // namespace pprs
