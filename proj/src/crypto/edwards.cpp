#include "pprs/crypto/edwards.hpp"

#include <mutex>

namespace pprs::ec {

namespace {

constexpr u64 MASK51 = (u64(1) << 51) - 1;

void fe_carry(Fe& h) {
  for (int pass = 0; pass < 3; ++pass) {
    u64 c;
    c = h.v[0] >> 51; h.v[0] &= MASK51; h.v[1] += c;
    c = h.v[1] >> 51; h.v[1] &= MASK51; h.v[2] += c;
    c = h.v[2] >> 51; h.v[2] &= MASK51; h.v[3] += c;
    c = h.v[3] >> 51; h.v[3] &= MASK51; h.v[4] += c;
    c = h.v[4] >> 51; h.v[4] &= MASK51; h.v[0] += 19 * c;
  }
}

// fully reduce to [0, p)
void fe_freeze(Fe& h) {
  fe_carry(h);
  u64 t[5];
  for (int i = 0; i < 5; ++i) t[i] = h.v[i];
  t[0] += 19;
  u64 c;
  c = t[0] >> 51; t[0] &= MASK51; t[1] += c;
  c = t[1] >> 51; t[1] &= MASK51; t[2] += c;
  c = t[2] >> 51; t[2] &= MASK51; t[3] += c;
  c = t[3] >> 51; t[3] &= MASK51; t[4] += c;
  c = t[4] >> 51; t[4] &= MASK51;
  // c == 1 iff h >= p; then h - p == t (the +19 minus the dropped 2^255)
  u64 keep_t = ~(c - 1);  // all-ones if c == 1
  for (int i = 0; i < 5; ++i) h.v[i] = (t[i] & keep_t) | (h.v[i] & ~keep_t);
}

Fe fe_pow(const Fe& base, const u64 exp[4]) {
  Fe r = fe_from_u64(1);
  for (int bit = 255; bit >= 0; --bit) {
    r = fe_mul(r, r);
    if ((exp[bit >> 6] >> (bit & 63)) & 1) r = fe_mul(r, base);
  }
  return r;
}

// exponent 2^a - b as four 64-bit words, for the small constants used below
void make_exp(u64 out[4], int a, u64 b) {
  out[0] = out[1] = out[2] = out[3] = 0;
  out[a >> 6] = u64(1) << (a & 63);
  u64 borrow = b;
  for (int i = 0; i < 4 && borrow; ++i) {
    u64 w = out[i];
    out[i] = w - borrow;
    borrow = (w < borrow) ? 1 : 0;
  }
}

struct CurveParams {
  Fe d;
  Fe two_d;
  Fe sqrt_m1;
  Point base;
};

const CurveParams& params();

}  // namespace

Fe fe_from_u64(u64 x) {
  Fe r;
  r.v[0] = x & MASK51;
  r.v[1] = x >> 51;
  return r;
}

Fe fe_add(const Fe& a, const Fe& b) {
  Fe r;
  for (int i = 0; i < 5; ++i) r.v[i] = a.v[i] + b.v[i];
  fe_carry(r);
  return r;
}

Fe fe_sub(const Fe& a, const Fe& b) {
  // a + 2p - b keeps limbs non-negative
  Fe r;
  r.v[0] = a.v[0] + ((u64(1) << 52) - 38) - b.v[0];
  for (int i = 1; i < 5; ++i) r.v[i] = a.v[i] + ((u64(1) << 52) - 2) - b.v[i];
  fe_carry(r);
  return r;
}

Fe fe_neg(const Fe& a) { return fe_sub(fe_from_u64(0), a); }

Fe fe_mul(const Fe& f, const Fe& g) {
  u128 r0 = (u128)f.v[0] * g.v[0] +
            (u128)19 * ((u128)f.v[1] * g.v[4] + (u128)f.v[2] * g.v[3] + (u128)f.v[3] * g.v[2] +
                        (u128)f.v[4] * g.v[1]);
  u128 r1 = (u128)f.v[0] * g.v[1] + (u128)f.v[1] * g.v[0] +
            (u128)19 * ((u128)f.v[2] * g.v[4] + (u128)f.v[3] * g.v[3] + (u128)f.v[4] * g.v[2]);
  u128 r2 = (u128)f.v[0] * g.v[2] + (u128)f.v[1] * g.v[1] + (u128)f.v[2] * g.v[0] +
            (u128)19 * ((u128)f.v[3] * g.v[4] + (u128)f.v[4] * g.v[3]);
  u128 r3 = (u128)f.v[0] * g.v[3] + (u128)f.v[1] * g.v[2] + (u128)f.v[2] * g.v[1] +
            (u128)f.v[3] * g.v[0] + (u128)19 * ((u128)f.v[4] * g.v[4]);
  u128 r4 = (u128)f.v[0] * g.v[4] + (u128)f.v[1] * g.v[3] + (u128)f.v[2] * g.v[2] +
            (u128)f.v[3] * g.v[1] + (u128)f.v[4] * g.v[0];

  Fe out;
  u128 c;
  c = r0 >> 51; out.v[0] = u64(r0) & MASK51; r1 += c;
  c = r1 >> 51; out.v[1] = u64(r1) & MASK51; r2 += c;
  c = r2 >> 51; out.v[2] = u64(r2) & MASK51; r3 += c;
  c = r3 >> 51; out.v[3] = u64(r3) & MASK51; r4 += c;
  c = r4 >> 51; out.v[4] = u64(r4) & MASK51;
  out.v[0] += 19 * u64(c);
  u64 c2 = out.v[0] >> 51;
  out.v[0] &= MASK51;
  out.v[1] += c2;
  return out;
}

Fe fe_invert(const Fe& a) {
  u64 e[4];
  make_exp(e, 255, 21);  // p - 2
  return fe_pow(a, e);
}

bool fe_eq(const Fe& a, const Fe& b) {
  Fe x = a, y = b;
  fe_freeze(x);
  fe_freeze(y);
  u64 diff = 0;
  for (int i = 0; i < 5; ++i) diff |= x.v[i] ^ y.v[i];
  return diff == 0;
}

bool fe_is_zero(const Fe& a) { return fe_eq(a, fe_from_u64(0)); }

void fe_to_bytes(u8 out[32], const Fe& a) {
  Fe x = a;
  fe_freeze(x);
  u64 w0 = x.v[0] | (x.v[1] << 51);
  u64 w1 = (x.v[1] >> 13) | (x.v[2] << 38);
  u64 w2 = (x.v[2] >> 26) | (x.v[3] << 25);
  u64 w3 = (x.v[3] >> 39) | (x.v[4] << 12);
  store64_le(out, w0);
  store64_le(out + 8, w1);
  store64_le(out + 16, w2);
  store64_le(out + 24, w3);
}

Fe fe_from_bytes(const u8 in[32]) {
  u64 w0 = load64_le(in);
  u64 w1 = load64_le(in + 8);
  u64 w2 = load64_le(in + 16);
  u64 w3 = load64_le(in + 24);
  Fe r;
  r.v[0] = w0 & MASK51;
  r.v[1] = ((w0 >> 51) | (w1 << 13)) & MASK51;
  r.v[2] = ((w1 >> 38) | (w2 << 26)) & MASK51;
  r.v[3] = ((w2 >> 25) | (w3 << 39)) & MASK51;
  r.v[4] = (w3 >> 12) & MASK51;
  return r;
}

namespace {

std::optional<Fe> fe_sqrt_with(const Fe& w, const Fe& sqrt_m1) {
  u64 e[4];
  make_exp(e, 252, 2);  // (p+3)/8
  Fe cand = fe_pow(w, e);
  if (fe_eq(fe_mul(cand, cand), w)) return cand;
  Fe cand2 = fe_mul(cand, sqrt_m1);
  if (fe_eq(fe_mul(cand2, cand2), w)) return cand2;
  return std::nullopt;
}

std::optional<Fe> fe_sqrt(const Fe& w) { return fe_sqrt_with(w, params().sqrt_m1); }

bool fe_is_odd(const Fe& a) {
  Fe x = a;
  fe_freeze(x);
  return x.v[0] & 1;
}

const CurveParams& params() {
  static CurveParams p = [] {
    CurveParams cp;
    cp.d = fe_mul(fe_neg(fe_from_u64(121665)), fe_invert(fe_from_u64(121666)));
    cp.two_d = fe_add(cp.d, cp.d);
    u64 e[4];
    make_exp(e, 253, 5);  // (p-1)/4
    cp.sqrt_m1 = fe_pow(fe_add(fe_from_u64(1), fe_from_u64(1)), e);

    Fe y = fe_mul(fe_from_u64(4), fe_invert(fe_from_u64(5)));
    Fe y2 = fe_mul(y, y);
    Fe u = fe_sub(y2, fe_from_u64(1));
    Fe v = fe_add(fe_mul(cp.d, y2), fe_from_u64(1));
    auto x = fe_sqrt_with(fe_mul(u, fe_invert(v)), cp.sqrt_m1);
    if (!x) throw std::logic_error("curve init: base x not found");
    Fe bx = *x;
    if (fe_is_odd(bx)) bx = fe_neg(bx);
    cp.base = Point{bx, y, fe_from_u64(1), fe_mul(bx, y)};
    // on-curve check deferred to callers; params() must not recurse
    return cp;
  }();
  return p;
}

}  // namespace

Point identity() {
  return Point{fe_from_u64(0), fe_from_u64(1), fe_from_u64(1), fe_from_u64(0)};
}

Point base_point() { return params().base; }

// Unified extended-coordinate addition, complete on the prime-order subgroup.
Point add(const Point& p, const Point& q) {
  Fe a = fe_mul(fe_sub(p.y, p.x), fe_sub(q.y, q.x));
  Fe b = fe_mul(fe_add(p.y, p.x), fe_add(q.y, q.x));
  Fe c = fe_mul(fe_mul(p.t, params().two_d), q.t);
  Fe d = fe_mul(fe_add(p.z, p.z), q.z);
  Fe e = fe_sub(b, a);
  Fe f = fe_sub(d, c);
  Fe g = fe_add(d, c);
  Fe h = fe_add(b, a);
  return Point{fe_mul(e, f), fe_mul(g, h), fe_mul(f, g), fe_mul(e, h)};
}

Point negate(const Point& p) { return Point{fe_neg(p.x), p.y, p.z, fe_neg(p.t)}; }

Point scalar_mul(const Scalar& s, const Point& p) {
  scalar_mul_counter().fetch_add(1, std::memory_order_relaxed);
  Point r = identity();
  for (int bit = 255; bit >= 0; --bit) {
    r = add(r, r);
    if ((s[bit >> 3] >> (bit & 7)) & 1) r = add(r, p);
  }
  return r;
}

bool equal(const Point& p, const Point& q) {
  return fe_eq(fe_mul(p.x, q.z), fe_mul(q.x, p.z)) &&
         fe_eq(fe_mul(p.y, q.z), fe_mul(q.y, p.z));
}

bool on_curve(const Point& p) {
  // (-x^2 + y^2) z^2 == z^4 + d x^2 y^2 and t z == x y
  Fe x2 = fe_mul(p.x, p.x);
  Fe y2 = fe_mul(p.y, p.y);
  Fe z2 = fe_mul(p.z, p.z);
  Fe lhs = fe_mul(fe_sub(y2, x2), z2);
  Fe rhs = fe_add(fe_mul(z2, z2), fe_mul(params().d, fe_mul(x2, y2)));
  return fe_eq(lhs, rhs) && fe_eq(fe_mul(p.t, p.z), fe_mul(p.x, p.y));
}

EncodedPoint encode(const Point& p) {
  Fe zi = fe_invert(p.z);
  Fe ax = fe_mul(p.x, zi);
  Fe ay = fe_mul(p.y, zi);
  EncodedPoint out{};
  fe_to_bytes(out.data(), ay);
  if (fe_is_odd(ax)) out[31] |= 0x80;
  return out;
}

std::optional<Point> decode(const EncodedPoint& e) {
  bool sign = (e[31] & 0x80) != 0;
  Fe y = fe_from_bytes(e.data());
  // reject non-canonical y
  u8 canon[32];
  fe_to_bytes(canon, y);
  for (int i = 0; i < 32; ++i) {
    u8 expect = (i == 31) ? u8(e[31] & 0x7f) : e[i];
    if (canon[i] != expect) return std::nullopt;
  }
  Fe y2 = fe_mul(y, y);
  Fe u = fe_sub(y2, fe_from_u64(1));
  Fe v = fe_add(fe_mul(params().d, y2), fe_from_u64(1));
  auto x = fe_sqrt(fe_mul(u, fe_invert(v)));
  if (!x) return std::nullopt;
  Fe ax = *x;
  if (fe_is_odd(ax) != sign) ax = fe_neg(ax);
  Point p{ax, y, fe_from_u64(1), fe_mul(ax, y)};
  if (!on_curve(p)) return std::nullopt;
  return p;
}

Scalar random_scalar(Prg& prg) {
  Scalar s{};
  do {
    prg.fill(s.data(), 32);
    s[31] &= 0x07;  // < 2^251, below the group order
  } while ([&] {
    u8 acc = 0;
    for (u8 b : s) acc |= b;
    return acc == 0;
  }());
  return s;
}

std::atomic<u64>& scalar_mul_counter() {
  static std::atomic<u64> c{0};
  return c;
}

}  // namespace pprs::ec
