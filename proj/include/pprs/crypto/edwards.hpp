#pragma once

#include <array>
#include <atomic>
#include <optional>

#include "pprs/crypto/chacha.hpp"
#include "pprs/util.hpp"

namespace pprs::ec {

// Field element mod 2^255 - 19, five 51-bit limbs.
struct Fe {
  u64 v[5] = {0, 0, 0, 0, 0};
};

Fe fe_from_u64(u64 x);
Fe fe_add(const Fe& a, const Fe& b);
Fe fe_sub(const Fe& a, const Fe& b);
Fe fe_mul(const Fe& a, const Fe& b);
Fe fe_neg(const Fe& a);
Fe fe_invert(const Fe& a);
bool fe_eq(const Fe& a, const Fe& b);
bool fe_is_zero(const Fe& a);
void fe_to_bytes(u8 out[32], const Fe& a);
Fe fe_from_bytes(const u8 in[32]);  // masks top bit

// Twisted Edwards curve -x^2 + y^2 = 1 + d x^2 y^2 over GF(2^255-19),
// d = -121665/121666. Extended coordinates (X:Y:Z:T), T = XY/Z.
struct Point {
  Fe x, y, z, t;
};

using Scalar = std::array<u8, 32>;
using EncodedPoint = std::array<u8, 32>;

Point identity();
Point base_point();
Point add(const Point& p, const Point& q);
Point negate(const Point& p);
Point scalar_mul(const Scalar& s, const Point& p);
bool equal(const Point& p, const Point& q);
bool on_curve(const Point& p);

EncodedPoint encode(const Point& p);
// Rejects encodings that do not decode to a curve point.
std::optional<Point> decode(const EncodedPoint& e);

Scalar random_scalar(Prg& prg);

// Instrumentation: total scalar multiplications performed (the expensive
// public-key operation); read by tests that pin the base-OT cost.
std::atomic<u64>& scalar_mul_counter();

}  // namespace pprs::ec
