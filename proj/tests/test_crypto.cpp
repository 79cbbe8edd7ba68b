#include <doctest.h>

#include "pprs/crypto/chacha.hpp"
#include "pprs/crypto/edwards.hpp"
#include "pprs/crypto/siphash.hpp"

using namespace pprs;

TEST_CASE("chacha20 known block") {
  u32 key[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  u8 out[64];
  chacha20_block(key, 0, 0, out);
  const u8 expect[32] = {0x76, 0xb8, 0xe0, 0xad, 0xa0, 0xf1, 0x3d, 0x90, 0x40, 0x5d, 0x6a,
                         0xe5, 0x53, 0x86, 0xbd, 0x28, 0xbd, 0xd2, 0x19, 0xb8, 0xa0, 0x8d,
                         0xed, 0x1a, 0xa8, 0x36, 0xef, 0xcc, 0x8b, 0x77, 0x0d, 0xc7};
  for (int i = 0; i < 32; ++i) CHECK(out[i] == expect[i]);
}

TEST_CASE("prg determinism and divergence") {
  Prg a(42), b(42), c(43);
  CHECK(a.next_u64() == b.next_u64());
  CHECK(a.next_u64() != c.next_u64());
  Prg d = a.derive(1), e = a.derive(2);
  CHECK(d.next_u64() != e.next_u64());
  // derive does not disturb the parent stream
  Prg f(42);
  f.next_u64();
  f.next_u64();
  CHECK(a.next_u64() == f.next_u64());
}

TEST_CASE("prg next_below bounds") {
  Prg g(7);
  for (int i = 0; i < 1000; ++i) CHECK(g.next_below(13) < 13);
}

TEST_CASE("siphash reference vector") {
  u8 key[16], msg[15];
  for (int i = 0; i < 16; ++i) key[i] = u8(i);
  for (int i = 0; i < 15; ++i) msg[i] = u8(i);
  u64 k0 = load64_le(key), k1 = load64_le(key + 8);
  CHECK(siphash24(k0, k1, nullptr, 0) == 0x726fdb47dd0e0e31ull);
  CHECK(siphash24(k0, k1, msg, 1) == 0x74f839c593dc67fdull);
  CHECK(siphash24(k0, k1, msg, 8) == 0x93f5f5799a932462ull);
  CHECK(siphash24(k0, k1, msg, 15) == 0xa129ca6149be45e5ull);
}

TEST_CASE("siphash keyed separation") {
  CHECK(siphash24(1, 2, "abc") != siphash24(1, 3, "abc"));
  CHECK(siphash24(1, 2, "abc") != siphash24(1, 2, "abd"));
}

TEST_CASE("edwards group laws") {
  ec::Point g = ec::base_point();
  CHECK(ec::on_curve(g));
  CHECK(ec::on_curve(ec::identity()));

  ec::Point g2 = ec::add(g, g);
  ec::Point g3a = ec::add(g2, g);
  ec::Point g3b = ec::add(g, g2);
  CHECK(ec::on_curve(g2));
  CHECK(ec::equal(g3a, g3b));

  CHECK(ec::equal(ec::add(g, ec::identity()), g));
  CHECK(ec::equal(ec::add(g, ec::negate(g)), ec::identity()));

  ec::Scalar five{};
  five[0] = 5;
  ec::Point g5 = ec::scalar_mul(five, g);
  ec::Point acc = ec::identity();
  for (int i = 0; i < 5; ++i) acc = ec::add(acc, g);
  CHECK(ec::equal(g5, acc));
}

TEST_CASE("edwards scalar homomorphism") {
  Prg rng(99);
  ec::Point g = ec::base_point();
  for (int trial = 0; trial < 4; ++trial) {
    ec::Scalar a = ec::random_scalar(rng), b = ec::random_scalar(rng);
    ec::Point ab1 = ec::add(ec::scalar_mul(a, g), ec::scalar_mul(b, g));
    ec::Point ba = ec::scalar_mul(b, ec::scalar_mul(a, g));
    ec::Point ab = ec::scalar_mul(a, ec::scalar_mul(b, g));
    CHECK(ec::equal(ab, ba));
    CHECK(ec::on_curve(ab1));
  }
}

TEST_CASE("edwards encode/decode round trip") {
  Prg rng(3);
  for (int trial = 0; trial < 8; ++trial) {
    ec::Scalar s = ec::random_scalar(rng);
    ec::Point p = ec::scalar_mul(s, ec::base_point());
    auto enc = ec::encode(p);
    auto dec = ec::decode(enc);
    REQUIRE(dec.has_value());
    CHECK(ec::equal(*dec, p));
  }
  // non-canonical y must be rejected
  ec::EncodedPoint bad{};
  for (auto& b : bad) b = 0xff;
  bad[31] = 0x7f;
  CHECK(!ec::decode(bad).has_value());
}
