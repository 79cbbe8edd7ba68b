#pragma once

#include <cmath>
#include <functional>

#include "pprs/crypto/chacha.hpp"
#include "pprs/ot/ot.hpp"
#include "pprs/transport/channel.hpp"

namespace pprs {

// Ring width is fixed at 64 bits; fixed-point fraction defaults to 12.
constexpr unsigned kRingBits = 64;
constexpr unsigned kDefaultFracBits = 12;

// ceil(x * 2^f), two's complement in the 2^64 ring
inline u64 fixed_encode(double x, unsigned f = kDefaultFracBits) {
  return u64(i64(std::ceil(x * double(u64(1) << f))));
}
inline double fixed_decode(u64 v, unsigned f = kDefaultFracBits) {
  return double(i64(v)) / double(u64(1) << f);
}

// One party's half of an XOR-shared bit vector.
struct BoolShares {
  int party = 0;
  BitVec bits;

  size_t size() const { return bits.size(); }
};

// One party's half of an additively shared vector mod 2^64.
struct ArithShares {
  int party = 0;
  std::vector<u64> elems;

  size_t size() const { return elems.size(); }
};

BitVec reconstruct_bits(const BoolShares& a, const BoolShares& b);
std::vector<u64> reconstruct_ring(const ArithShares& a, const ArithShares& b);

// Pre-computed multiplication triples. Consumption is strictly monotone; a
// pool without a refill hook throws once drained.
class TriplePool {
 public:
  enum class Kind { boolean, arithmetic };
  using BoolRefill =
      std::function<void(size_t need_words, std::vector<u64>&, std::vector<u64>&, std::vector<u64>&)>;

  explicit TriplePool(Kind kind = Kind::boolean) : kind_(kind) {}

  static TriplePool fixed_boolean(std::vector<u64> a, std::vector<u64> b, std::vector<u64> c);
  static TriplePool fixed_arith(std::vector<u64> a, std::vector<u64> b, std::vector<u64> c);

  void set_bool_refill(BoolRefill f) { bool_refill_ = std::move(f); }

  Kind kind() const { return kind_; }

  // word-aligned take of `words` x 64 boolean triples; returns start index
  size_t take_bool_words(size_t words);
  const u64* bool_a() const { return ba_.data(); }
  const u64* bool_b() const { return bb_.data(); }
  const u64* bool_c() const { return bc_.data(); }

  // arithmetic triples, one element each
  size_t take_arith(size_t count);
  const u64* arith_a() const { return aa_.data(); }
  const u64* arith_b() const { return ab_.data(); }
  const u64* arith_c() const { return ac_.data(); }

  u64 consumed_bool_triples() const { return u64(bool_cursor_) * 64; }

 private:
  Kind kind_;
  std::vector<u64> ba_, bb_, bc_;
  size_t bool_cursor_ = 0;
  std::vector<u64> aa_, ab_, ac_;
  size_t arith_cursor_ = 0;
  BoolRefill bool_refill_;
};

// Shared-seed dealer triples (test/offline mode): both parties derive the
// same stream and keep their halves.
void dealer_bool_triples(Prg& dealer, int party, size_t words, std::vector<u64>& a,
                         std::vector<u64>& b, std::vector<u64>& c);
void dealer_arith_triples(Prg& dealer, int party, size_t count, std::vector<u64>& a,
                          std::vector<u64>& b, std::vector<u64>& c);
// OT-backed boolean triple generation for live modes.
void ot_bool_triples(int party, Channel& ch, OtService& ot, Prg& rng, size_t words,
                     std::vector<u64>& a, std::vector<u64>& b, std::vector<u64>& c);

// The two-party gate set. Every operation is vectorized; both parties must
// call the same sequence of operations with their respective shares.
class GateCtx {
 public:
  GateCtx(int party, Channel& ch, OtService& ot, TriplePool& pool, Prg rng);

  int party() const { return party_; }

  // secret input: owner supplies plaintext, the other party passes nullptr
  BoolShares input_bits(int owner, const BitVec* plaintext, size_t n);
  ArithShares input_ring(int owner, const std::vector<u64>* plaintext, size_t n);

  BitVec reveal(const BoolShares& s);
  std::vector<u64> reveal(const ArithShares& s);

  static BoolShares xor_shares(const BoolShares& x, const BoolShares& y);
  BoolShares not_local(const BoolShares& x) const;  // party 0 flips, party 1 unchanged
  BoolShares and_batch(const BoolShares& x, const BoolShares& y,
                       FrameType tag = FrameType::GATE_ROUND);
  BoolShares or_batch(const BoolShares& x, const BoolShares& y,
                      FrameType tag = FrameType::GATE_ROUND);

  // z[i] = w[i] if b[i] else 0; two OTs per element, one in each direction
  ArithShares mux(const ArithShares& w, const BoolShares& b);
  // {0,1} ring lift of an XOR-shared bit; one OT per element
  ArithShares b2a(const BoolShares& b);
  // strict sign bit of the low `width` bits (two's complement), via a
  // parallel-prefix adder over the two shares' bit decompositions
  BoolShares msb(const ArithShares& x, unsigned width = kRingBits);

  // reveal audit: the engine asserts reveal discipline from these
  size_t reveal_calls() const { return reveal_calls_; }
  u64 revealed_values() const { return revealed_values_; }

 private:
  int party_;
  Channel& ch_;
  OtService& ot_;
  TriplePool& pool_;
  Prg rng_;
  size_t reveal_calls_ = 0;
  u64 revealed_values_ = 0;
};

}  // namespace pprs
