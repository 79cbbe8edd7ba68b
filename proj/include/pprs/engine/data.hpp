#pragma once

#include "pprs/features/features.hpp"

namespace pprs {

// lowercase + trim; applied at ingestion so both parties agree on the bytes
// entering feature engineering
std::string normalize_value(const std::string& raw);

RecordTable load_csv(const std::string& path);
RecordTable parse_csv(const std::string& text);
void save_csv(const RecordTable& t, const std::string& path);

struct GenSpec {
  size_t n = 1000;
  double typo_rate = 0;       // chance an overlapping record is perturbed (1-2 edits)
  double dup_rate = 0;        // fraction of rows that duplicate earlier rows
  double missing_rate = 0;    // per-cell blanking chance
  double overlap = 0.5;       // fraction of entities present in both tables
  u64 seed = 1;
};

struct Synthetic {
  RecordTable t0, t1;
  BitVec truth0;  // per t0 row: a genuine counterpart exists in t1
  std::vector<std::pair<u32, u32>> links;
  size_t dup_count0 = 0, dup_count1 = 0;
};

Synthetic gen_synthetic(const GenSpec& spec);

}  // namespace pprs
