#pragma once

#include "pprs/ot/ot.hpp"
#include "pprs/permnet/permnet.hpp"
#include "pprs/shares/shares.hpp"
#include "pprs/transport/channel.hpp"

namespace pprs {

// Optimization toggles. All three on = the optimized alignment protocol;
// all three off = the unoptimized extended-permutation baseline.
struct OfaOptions {
  bool tail_drop = true;      // drop the redundant tail after dummy placement
  bool partial_tables = true; // replication switches send only the bottom column
  bool bit_payload = true;    // 1-bit wire labels instead of 64-bit
};

inline OfaOptions oep_baseline() { return OfaOptions{false, false, false}; }

struct OfaPhaseStats {
  u64 bytes_sent = 0;
  u64 bytes_recv = 0;
  u64 ot_count = 0;
  u64 rounds = 0;
};

struct OfaReport {
  OfaOptions options;
  size_t m_real = 0, n_real = 0, m_pad = 0, n_pad = 0;
  OfaPhaseStats phase[3];
  OfaPhaseStats setup;  // blinded inputs and any OT seeding inside the run
  u64 labels_generated = 0;  // labeler side: fresh wire labels drawn
  u64 wall_micros = 0;
  bool insecure_dealer = false;

  u64 total_bytes() const;
  u64 total_ots() const;
};

// Aligned output shares. Bit-payload runs fill `bits`; word-payload runs
// (the baseline) fill `words`, XOR-shared, each reconstructing to 0/1.
struct OfaOutput {
  BoolShares bits;
  std::vector<u64> words;
  OfaReport report;
};

// Programmer side (P0): holds the switch program derived from its extended
// permutation plus its input shares; acts as OT receiver for every switch.
OfaOutput ofa_programmer(Channel& ch, OtService& ot, const SwitchProgram& prog,
                         const BitVec& input_share, const OfaOptions& opt);

// Label side (P1): knows only the public network shape; generates wire
// labels and switch tables, acts as OT sender, and outputs its final labels.
OfaOutput ofa_labeler(Channel& ch, OtService& ot, size_t m_real, size_t n_real,
                      const BitVec& input_share, const OfaOptions& opt, Prg rng);

}  // namespace pprs
