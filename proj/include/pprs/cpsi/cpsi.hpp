#pragma once

#include <optional>

#include "pprs/binning/binning.hpp"
#include "pprs/shares/shares.hpp"

namespace pprs {

// Fixed-width keyed digests for set elements. Real values re-hash until they
// avoid the reserved fake prefixes; missing cells become party-tagged fakes.
u64 digest_value(std::string_view value, const HashKey& key);
HashKey digest_key(const std::array<u8, 32>& salt, u32 attr_id);
std::vector<u64> digest_values(const std::vector<std::string>& values, const BitVec& missing,
                               size_t missing_stride_offset, size_t stride,
                               const std::array<u8, 32>& salt, u32 attr_id, int party);

// Shares of [x == y] per index; both parties pass their own digest vector.
// (l-1) AND gates per pair, log2(l) rounds.
BoolShares private_equality_batch(GateCtx& gates, const std::vector<u64>& mine, unsigned width = 64,
                                  FrameType tag = FrameType::CPSI_EQ_ROUND);

struct CpsiResult {
  BoolShares membership;  // one bit per bin
  u32 beta = 0;
  u32 retries = 0;
  u64 equality_tests = 0;
  std::optional<ExtendedPermutation> ep;  // receiver side only
};

// Per-attribute circuit PSI. The receiver cuckoo-hashes its column, the
// sender simple-hashes; one equality circuit per (bin, sender slot); the
// membership bit is the OR over the beta slots.
CpsiResult cpsi_attribute_receiver(GateCtx& gates, Channel& ch, Prg& rng,
                                   const std::vector<u64>& record_digests, size_t bins,
                                   const std::array<u8, 32>& salt, u32 attr_id,
                                   const BinningParams& bp);
CpsiResult cpsi_attribute_sender(GateCtx& gates, Channel& ch, Prg& rng,
                                 const std::vector<u64>& value_digests, size_t bins,
                                 const std::array<u8, 32>& salt, u32 attr_id,
                                 const BinningParams& bp);

}  // namespace pprs
