#pragma once

#include <string>
#include <vector>

#include "pprs/crypto/siphash.hpp"
#include "pprs/util.hpp"

namespace pprs {

// U+241F SYMBOL FOR UNIT SEPARATOR; rejected inside attribute values at
// ingestion so concatenation stays injective.
inline const std::string kFieldSeparator = "\xe2\x90\x9f";

struct RecordTable {
  size_t rows = 0, cols = 0;
  std::vector<std::string> names;
  std::vector<std::string> cells;  // row-major
  BitVec missing;                  // rows x cols

  const std::string& at(size_t r, size_t c) const { return cells[r * cols + c]; }
  std::string& at(size_t r, size_t c) { return cells[r * cols + c]; }
  bool is_missing(size_t r, size_t c) const { return missing.get(r * cols + c); }
  void set_missing(size_t r, size_t c, bool m) { missing.set(r * cols + c, m); }

  static RecordTable make(size_t rows, size_t cols);
};

struct LshParams {
  u32 bands = 8;  // B
  u32 rows = 4;   // R
  u32 q = 2;      // gram length
};

struct DerivedSpec {
  std::vector<u32> sources;  // attribute indices to concatenate
  bool approximate = false;
  LshParams lsh;
};

struct SchemaConfig {
  bool schema_aware = true;  // agnostic mode uses one spec over all columns
  std::vector<DerivedSpec> derived;

  void validate(size_t cols) const;
  static SchemaConfig agnostic(size_t cols, bool approximate = false, LshParams lsh = {});
};

// One column per derived attribute, or B signature columns per approximate
// attribute. Columns carry the id of the attribute they expand (band group).
struct DerivedTable {
  size_t rows = 0, cols = 0;
  std::vector<std::string> cells;  // row-major; band signatures as 8 raw bytes
  BitVec missing;
  std::vector<u32> band_group;  // per column: source derived-attribute id
  std::vector<u32> band_index;  // per column: band number (0 for exact)

  const std::string& at(size_t r, size_t c) const { return cells[r * cols + c]; }
  bool is_missing(size_t r, size_t c) const { return missing.get(r * cols + c); }
};

// concatenate configured sources; a derived cell is missing iff all its
// sources are missing
RecordTable derive_attributes(const RecordTable& table, const SchemaConfig& cfg);

// all overlapping length-q substrings; strings shorter than q yield the
// whole string as a single gram
std::vector<std::string> qgrams(const std::string& s, u32 q);

// B band signatures over BR seeded min-hashes; the band index is hashed in
std::vector<u64> minhash_bands(const std::vector<std::string>& grams, const LshParams& p,
                               const std::array<u8, 32>& salt, u32 attr_id);

DerivedTable expand_lsh(const RecordTable& table, const SchemaConfig& cfg,
                        const std::array<u8, 32>& salt);

}  // namespace pprs
