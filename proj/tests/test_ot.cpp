#include <doctest.h>

#include <cmath>

#include "pprs/crypto/edwards.hpp"
#include "pprs/engine/engine.hpp"
#include "pprs/ot/ot.hpp"

using namespace pprs;

namespace {

void check_mode(OtMode mode, size_t count, size_t msg_bytes, u64 seed) {
  Prg gen(seed);
  Bytes m0(count * msg_bytes), m1(count * msg_bytes);
  gen.fill(m0.data(), m0.size());
  gen.fill(m1.data(), m1.size());
  BitVec choices = gen.next_bits(count);
  Bytes got(count * msg_bytes);

  run_pair(
      [&](Channel& ch) {
        std::optional<Prg> dealer;
        if (mode == OtMode::dealer) dealer = Prg(u64(99));
        OtService ot(mode, 0, ch, Prg(seed + 1), dealer);
        ot.send(m0.data(), m1.data(), count, msg_bytes);
        CHECK(ot.stats().logical_ots == count);
      },
      [&](Channel& ch) {
        std::optional<Prg> dealer;
        if (mode == OtMode::dealer) dealer = Prg(u64(99));
        OtService ot(mode, 1, ch, Prg(seed + 2), dealer);
        ot.recv(choices, got.data(), msg_bytes);
        CHECK(ot.stats().logical_ots == count);
      });

  for (size_t j = 0; j < count; ++j) {
    const u8* expect = (choices.get(j) ? m1 : m0).data() + j * msg_bytes;
    REQUIRE(std::memcmp(got.data() + j * msg_bytes, expect, msg_bytes) == 0);
  }
}

}  // namespace

TEST_CASE("dealer OT correctness over 10^4 instances") {
  check_mode(OtMode::dealer, 10000, 8, 11);
}

TEST_CASE("dealer OT both directions interleaved") {
  Prg gen(5);
  Bytes ma(256), mb(256);
  gen.fill(ma.data(), ma.size());
  gen.fill(mb.data(), mb.size());
  BitVec c0 = gen.next_bits(256), c1 = gen.next_bits(256);
  Bytes got0(256), got1(256);
  run_pair(
      [&](Channel& ch) {
        OtService ot(OtMode::dealer, 0, ch, Prg(u64(1)), Prg(u64(42)));
        ot.send(ma.data(), mb.data(), 256, 1);
        ot.recv(c0, got0.data(), 1);
      },
      [&](Channel& ch) {
        OtService ot(OtMode::dealer, 1, ch, Prg(u64(2)), Prg(u64(42)));
        ot.recv(c1, got1.data(), 1);
        ot.send(ma.data(), mb.data(), 256, 1);
      });
  for (size_t j = 0; j < 256; ++j) {
    CHECK(got1[j] == (c1.get(j) ? mb : ma)[j]);
    CHECK(got0[j] == (c0.get(j) ? mb : ma)[j]);
  }
}

TEST_CASE("base OT correctness over 256 instances") {
  check_mode(OtMode::base, 256, 16, 21);
}

TEST_CASE("base OT building block keys") {
  std::vector<std::array<u8, 32>> k0, k1, kr;
  BitVec choices(64);
  Prg g(3);
  for (size_t i = 0; i < 64; ++i) choices.set(i, g.next_bit());
  OtStats s0, s1;
  run_pair(
      [&](Channel& ch) {
        Prg rng(7);
        base_ot_send(ch, rng, 64, k0, k1, s0);
      },
      [&](Channel& ch) {
        Prg rng(8);
        base_ot_recv(ch, rng, choices, kr, s1);
      });
  for (size_t i = 0; i < 64; ++i) REQUIRE(kr[i] == (choices.get(i) ? k1[i] : k0[i]));
  CHECK(s0.base_ot_instances == 64);
}

TEST_CASE("base OT rejects malformed group elements") {
  auto [a, b] = make_inmem_pair();
  std::thread bogus([&] {
    Bytes junk(32, 0xFF);  // not a canonical point encoding
    a->send_frame(FrameType::OT_MSG2, junk);
  });
  Prg rng(1);
  std::vector<std::array<u8, 32>> keys;
  BitVec choices(4);
  OtStats stats;
  CHECK_THROWS_WITH_AS(base_ot_recv(*b, rng, choices, keys, stats),
                       "base OT: malformed group element", std::runtime_error);
  bogus.join();
}

TEST_CASE("extended OT correctness at 2048") {
  check_mode(OtMode::extended, 2048, 8, 31);
}

TEST_CASE("extension over all-zero choices yields m0") {
  size_t count = 512;
  Bytes m0(count), m1(count), got(count);
  for (size_t i = 0; i < count; ++i) {
    m0[i] = u8(i);
    m1[i] = u8(~i);
  }
  BitVec zeros(count);
  run_pair(
      [&](Channel& ch) {
        OtService ot(OtMode::extended, 0, ch, Prg(u64(1)));
        ot.send(m0.data(), m1.data(), count, 1);
      },
      [&](Channel& ch) {
        OtService ot(OtMode::extended, 1, ch, Prg(u64(2)));
        ot.recv(zeros, got.data(), 1);
      });
  CHECK(got == m0);
}

TEST_CASE("extension pays lambda public-key operations regardless of batch size") {
  auto run_batch = [&](size_t count) {
    u64 muls_before = ec::scalar_mul_counter().load();
    u64 base_instances = 0;
    Bytes m0(count), m1(count), got(count);
    BitVec choices(count);
    run_pair(
        [&](Channel& ch) {
          OtService ot(OtMode::extended, 0, ch, Prg(u64(1)));
          ot.send(m0.data(), m1.data(), count, 1);
          base_instances = ot.stats().base_ot_instances;
        },
        [&](Channel& ch) {
          OtService ot(OtMode::extended, 1, ch, Prg(u64(2)));
          ot.recv(choices, got.data(), 1);
        });
    return std::pair<u64, u64>(ec::scalar_mul_counter().load() - muls_before, base_instances);
  };
  auto [muls_small, base_small] = run_batch(2048);
  auto [muls_large, base_large] = run_batch(65536);
  CHECK(muls_small == muls_large);
  CHECK(base_small == kOtLambda);
  CHECK(base_large == kOtLambda);
}

TEST_CASE("choice privacy proxy: receiver transcript distribution") {
  // byte-histogram total-variation estimate between all-zero and all-one
  // choice vectors, fresh randomness per transcript
  const size_t transcripts = 1000, per = 512;
  std::array<u64, 256> hist[2] = {{}, {}};
  for (size_t t = 0; t < transcripts; ++t) {
    for (int which = 0; which < 2; ++which) {
      BitVec choices(per);
      if (which) choices.flip_all();
      Bytes m0(per), m1(per), got(per);
      run_pair(
          [&](Channel& ch) {
            OtService ot(OtMode::dealer, 0, ch, Prg(t * 31 + 1), Prg(t + 7));
            ot.send(m0.data(), m1.data(), per, 1);
          },
          [&](Channel& ch) {
            ch.set_send_observer([&](FrameType ft, const u8* p, size_t n) {
              if (ft == FrameType::OT_CORRECTION)
                for (size_t i = 0; i < n; ++i) hist[which][p[i]]++;
            });
            OtService ot(OtMode::dealer, 1, ch, Prg(t * 31 + 2), Prg(t + 7));
            ot.recv(choices, got.data(), 1);
          });
    }
  }
  double n0 = 0, n1 = 0;
  for (int i = 0; i < 256; ++i) {
    n0 += double(hist[0][i]);
    n1 += double(hist[1][i]);
  }
  REQUIRE(n0 == n1);
  REQUIRE(n0 == transcripts * per / 8);
  double tv = 0;
  for (int i = 0; i < 256; ++i) tv += std::abs(hist[0][i] / n0 - hist[1][i] / n1);
  tv /= 2;
  CHECK(tv < 0.05);
}
