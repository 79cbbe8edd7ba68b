#pragma once

#include <string_view>

#include "pprs/util.hpp"

namespace pprs {

// SipHash-2-4, 64-bit output. The project-wide seeded keyed hash.
u64 siphash24(u64 k0, u64 k1, const void* data, size_t len);

inline u64 siphash24(u64 k0, u64 k1, std::string_view s) {
  return siphash24(k0, k1, s.data(), s.size());
}

struct HashKey {
  u64 k0 = 0;
  u64 k1 = 0;
  u64 operator()(std::string_view s) const { return siphash24(k0, k1, s); }
  u64 operator()(const void* p, size_t n) const { return siphash24(k0, k1, p, n); }
};

}  // namespace pprs
