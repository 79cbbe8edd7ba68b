#pragma once

#include <functional>
#include <memory>
#include <thread>

#include "pprs/cpsi/cpsi.hpp"
#include "pprs/engine/config.hpp"
#include "pprs/engine/data.hpp"
#include "pprs/transport/handshake.hpp"

namespace pprs {

struct ScreeningOutcome {
  u64 c = 0;
  std::optional<BitVec> decisions;  // revealed only when both parties opt in
  std::array<u8, 32> salt{};
  size_t n_local = 0, n_peer = 0, derived_cols = 0, attrs = 0;
  u32 max_beta = 0, total_retries = 0;
  u64 logical_ots = 0;
  u64 bytes_sent = 0, bytes_recv = 0, rounds = 0;
  std::map<std::string, PhaseCounters> traffic;
  u64 wall_micros = 0;
  bool insecure_dealer = false;
  size_t reveal_calls = 0;
  u64 revealed_values = 0;
};

// One full screening protocol run over an open channel; handles either role.
ScreeningOutcome run_screening(const RunConfig& cfg, const RecordTable& table, Channel& ch);

// The same pipeline in the clear; the ground-truth referee for every
// equivalence test. `salt` must be the session salt of the protocol run it
// is compared against (LSH signatures are salt-keyed).
struct OracleOutcome {
  u64 c = 0;
  BitVec decisions;
};
OracleOutcome plaintext_oracle(const RecordTable& t0, const RecordTable& t1, const RunConfig& cfg,
                               const std::array<u8, 32>& salt);

// The salt two parties configured with seeds s0, s1 will negotiate.
std::array<u8, 32> derived_salt(u64 seed0, u64 seed1);

// --- Screening-then-Linkage ---------------------------------------------

struct CandidateReport {
  std::string label;
  bool errored = false;
  std::string error;
  u64 c = 0;
  bool passed = false;
  double pprs_seconds = 0;
  u64 bytes = 0, ots = 0;
  std::map<std::string, PhaseCounters> traffic;  // per phase tag
  std::optional<BitVec> decisions;               // only with two-sided opt-in
  bool pprl_invoked = false;
  double pprl_seconds = 0;
  u64 linked_records = 0;
};

struct ScreeningReport {
  u64 threshold = 0;
  std::vector<CandidateReport> candidates;
  double alpha = 0;
  double t_pprs = 0;  // mean screening seconds
  double t_pprl = 0;  // mean stub seconds over invoked candidates
  double gamma = 0;   // t_pprs / t_pprl + alpha
  bool gamma_valid = false;
  bool insecure_dealer = false;
  bool pprl_stub_nonprivate = true;
};

using ChannelFactory = std::function<std::unique_ptr<Channel>()>;

// Requester loop: screen every candidate, then run the linkage stub for the
// ones above threshold. A failing candidate is marked errored and skipped.
ScreeningReport screen_then_link(const RunConfig& cfg, const RecordTable& table,
                                 const std::vector<std::pair<std::string, ChannelFactory>>& candidates);

// Candidate side: serve one requester connection (screening + optional stub).
void screen_serve(const RunConfig& cfg, const RecordTable& table, Channel& ch);

void write_report(std::ostream& os, const ScreeningReport& r);

// --- plaintext PPRL stub (NON-PRIVATE, candidate ships its keys) ----------
u64 pprl_stub_requester(const RecordTable& table, Channel& ch);
void pprl_stub_candidate(const RecordTable& table, Channel& ch);

// --- alignment benchmark ---------------------------------------------------

struct OfaBenchRow {
  size_t n = 0;
  u32 eps_percent = 27;
  std::string variant;
  u64 switches = 0;
  u64 ots = 0;
  u64 bytes = 0;
  double seconds = 0;
};

// Runs one two-party alignment over an in-memory channel (dealer OT) with a
// random extended permutation of n records; measures the requester side.
OfaBenchRow bench_alignment(size_t n, u32 eps_percent, const OfaOptions& opt, u64 seed);

const std::vector<std::pair<std::string, OfaOptions>>& bench_variants();

// two-thread helper for in-process protocol runs; rethrows either side's error
void run_pair(const std::function<void(Channel&)>& p0, const std::function<void(Channel&)>& p1);

}  // namespace pprs
