#pragma once

#include "pprs/shares/shares.hpp"

namespace pprs {

enum class MissingMode {
  replace,  // P0 swaps the unmatched weight for the missing weight
  add,      // P0 adds the missing weight on top
};

struct WeightVector {
  std::vector<double> we;  // matched weight per attribute
  std::vector<double> wn;  // unmatched
  std::vector<double> wm;  // missing
  double threshold = 0;
  unsigned frac_bits = kDefaultFracBits;
};

// Shares of the weights at one party (the requester generates and
// distributes them).
struct WeightShares {
  std::vector<ArithShares> we, wn;  // one singleton share per attribute
  ArithShares threshold;
};

WeightShares share_weights(GateCtx& gates, int owner, const WeightVector* w, size_t attrs);

// OR over each approximate attribute's B band columns; exact columns pass
// through. `group` maps each column to its attribute id.
std::vector<BoolShares> band_or(GateCtx& gates, const std::vector<BoolShares>& columns,
                                const std::vector<u32>& group, size_t attrs);

// linked iff every attribute matched
BoolShares decide_all_match(GateCtx& gates, const std::vector<BoolShares>& attrs);

// s[i] = sum_j (matched ? we_j : wn_j); P0 then locally adjusts rows with
// missing cells using its mask and plaintext weights
ArithShares score_linear(GateCtx& gates, const std::vector<BoolShares>& attrs,
                         const WeightShares& ws, const WeightVector* plain_weights,
                         const BitVec* missing_mask,  // rows x attrs at P0, null at P1
                         size_t rows, MissingMode mode);

// d[i] = 1 iff s[i] >= t, via the sign of t - s - 1
BoolShares decide_threshold(GateCtx& gates, const ArithShares& score, const ArithShares& threshold);

struct CollabValue {
  u64 value = 0;
  ArithShares share;
};

// cardinality of linked records; revealed to both parties
CollabValue collaboration_value(GateCtx& gates, const BoolShares& decisions);

// Offline calibration (appendix formulas).
struct CalibrationStats {
  std::vector<double> p1;  // match probability for linked pairs
  std::vector<double> p2;  // for non-linked pairs
  std::vector<double> missing_rate;
  std::vector<double> repetition_rate;
};

struct Calibration {
  double e1 = 0, e2 = 0, threshold = 0;
  bool feasible = false;
};

// E over the 2^m outcome expansion (exponential; m <= 30 enforced)
double expected_score_literal(const std::vector<double>& w, const std::vector<double>& p);
// the same expectation by linearity
double expected_score_linear(const std::vector<double>& w, const std::vector<double>& p);

Calibration calibrate_weights(const CalibrationStats& stats, const std::vector<double>& w,
                              bool literal_sums = false);

}  // namespace pprs
