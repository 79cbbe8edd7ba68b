#pragma once

#include <unordered_map>

#include "pprs/crypto/chacha.hpp"
#include "pprs/crypto/siphash.hpp"
#include "pprs/util.hpp"

namespace pprs {

// Digest domains: real values re-hash until their top byte avoids the two
// reserved prefixes, so fake-vs-anything equality is impossible by
// construction.
constexpr u8 kReceiverFakePrefix = 0xFF;
constexpr u8 kSenderFakePrefix = 0xFE;

inline bool digest_is_reserved(u64 d) {
  u8 top = u8(d >> 56);
  return top == kReceiverFakePrefix || top == kSenderFakePrefix;
}

struct BinningParams {
  u32 eps_percent = 27;  // table holds ceil((1+eps) n) bins
  u32 num_hash = 3;
  u32 evict_limit = 500;
  u32 max_retries = 8;
};

inline size_t table_bins(size_t n, u32 eps_percent) {
  return (n * (100 + eps_percent) + 99) / 100;
}

struct BinKeys {
  std::vector<HashKey> h;  // one keyed hash per candidate bin function
  size_t bins = 0;

  size_t bin_of(u64 digest, u32 which) const {
    u8 buf[8];
    store64_le(buf, digest);
    return size_t(h[which](buf, 8) % bins);
  }
};

BinKeys derive_bin_keys(const std::array<u8, 32>& salt, u32 attr_id, u32 retry, u32 num_hash,
                        size_t bins);

struct InsertionFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Receiver-side table: each distinct value in exactly one of its candidate
// bins, no stash; empty bins hold receiver-domain fakes.
struct CuckooTable {
  size_t bins = 0;
  std::vector<u64> slot;       // digest per bin (real or fake)
  BitVec real;                 // bin holds a real value
  std::unordered_map<u64, u32> bin_of_digest;  // real digests only
};

CuckooTable cuckoo_insert(const std::vector<u64>& distinct_digests, const BinKeys& keys,
                          u32 evict_limit, Prg& rng);

// Sender-side table: every value in all of its candidate bins, padded to the
// public maximum load beta with sender-domain fakes.
struct SimpleTable {
  size_t bins = 0;
  u32 beta = 0;
  std::vector<u64> slots;  // bins x beta, bin-major
};

SimpleTable simple_insert(const std::vector<u64>& distinct_digests, const BinKeys& keys, Prg& rng);

// Output-position -> source-bin map with replication, extracted from the
// receiver's table.
struct ExtendedPermutation {
  u32 sources = 0;           // M = bins
  std::vector<u32> src;      // length n; src[y] = bin feeding record y
  BitVec output_is_replica;  // per output: not the first record using its bin
  BitVec bin_redundant;      // per bin: feeds no output
};

ExtendedPermutation extended_perm_from_cuckoo(const CuckooTable& table,
                                              const std::vector<u64>& record_digests);

}  // namespace pprs
