#include "pprs/features/features.hpp"

#include <algorithm>
#include <unordered_set>

namespace pprs {

RecordTable RecordTable::make(size_t rows, size_t cols) {
  RecordTable t;
  t.rows = rows;
  t.cols = cols;
  t.cells.resize(rows * cols);
  t.missing = BitVec(rows * cols);
  return t;
}

void SchemaConfig::validate(size_t cols) const {
  if (derived.empty()) throw std::invalid_argument("schema: at least one derived attribute");
  for (const auto& d : derived) {
    if (d.sources.empty()) throw std::invalid_argument("schema: derived attribute without sources");
    for (u32 s : d.sources)
      if (s >= cols) throw std::out_of_range("schema: source attribute index out of range");
    if (d.approximate && (d.lsh.bands < 1 || d.lsh.rows < 1 || d.lsh.q < 1))
      throw std::invalid_argument("schema: LSH parameters must be >= 1");
  }
}

SchemaConfig SchemaConfig::agnostic(size_t cols, bool approximate, LshParams lsh) {
  SchemaConfig cfg;
  cfg.schema_aware = false;
  DerivedSpec d;
  for (size_t c = 0; c < cols; ++c) d.sources.push_back(u32(c));
  d.approximate = approximate;
  d.lsh = lsh;
  cfg.derived.push_back(d);
  return cfg;
}

RecordTable derive_attributes(const RecordTable& table, const SchemaConfig& cfg) {
  cfg.validate(table.cols);
  RecordTable out = RecordTable::make(table.rows, cfg.derived.size());
  for (size_t r = 0; r < table.rows; ++r) {
    for (size_t d = 0; d < cfg.derived.size(); ++d) {
      const auto& spec = cfg.derived[d];
      std::string v;
      bool all_missing = true;
      for (size_t k = 0; k < spec.sources.size(); ++k) {
        if (k) v += kFieldSeparator;
        if (!table.is_missing(r, spec.sources[k])) {
          v += table.at(r, spec.sources[k]);
          all_missing = false;
        }
      }
      out.at(r, d) = all_missing ? std::string() : v;
      out.set_missing(r, d, all_missing);
    }
  }
  return out;
}

std::vector<std::string> qgrams(const std::string& s, u32 q) {
  if (q < 1) throw std::invalid_argument("qgrams: q must be >= 1");
  std::vector<std::string> out;
  if (s.size() < q) {
    out.push_back(s);
    return out;
  }
  std::unordered_set<std::string> seen;
  for (size_t i = 0; i + q <= s.size(); ++i) {
    std::string g = s.substr(i, q);
    if (seen.insert(g).second) out.push_back(std::move(g));
  }
  return out;
}

namespace {

HashKey lsh_key(const std::array<u8, 32>& salt, u32 attr_id, u32 which, u64 domain) {
  u64 s0 = load64_le(salt.data() + 16);
  u64 s1 = load64_le(salt.data() + 24);
  u8 label[16];
  store64_le(label, (u64(attr_id) << 32) | which);
  store64_le(label + 8, domain);
  return HashKey{siphash24(s0, s1, label, 16), siphash24(s1, s0, label, 16)};
}

}  // namespace

std::vector<u64> minhash_bands(const std::vector<std::string>& grams, const LshParams& p,
                               const std::array<u8, 32>& salt, u32 attr_id) {
  if (grams.empty()) throw std::invalid_argument("minhash_bands: empty gram set");
  std::vector<u64> digests(p.bands * p.rows);
  for (u32 k = 0; k < p.bands * p.rows; ++k) {
    HashKey hk = lsh_key(salt, attr_id, k, 0x6d68 /* mh */);
    u64 best = ~u64(0);
    for (const auto& g : grams) best = std::min(best, hk(g));
    digests[k] = best;
  }
  std::vector<u64> sigs(p.bands);
  for (u32 b = 0; b < p.bands; ++b) {
    HashKey hk = lsh_key(salt, attr_id, b, 0x62616e64 /* band */);
    sigs[b] = hk(&digests[b * p.rows], p.rows * 8);
  }
  return sigs;
}

DerivedTable expand_lsh(const RecordTable& table, const SchemaConfig& cfg,
                        const std::array<u8, 32>& salt) {
  size_t cols = 0;
  for (const auto& d : cfg.derived) cols += d.approximate ? d.lsh.bands : 1;

  DerivedTable out;
  out.rows = table.rows;
  out.cols = cols;
  out.cells.resize(out.rows * cols);
  out.missing = BitVec(out.rows * cols);
  out.band_group.resize(cols);
  out.band_index.resize(cols);

  size_t c0 = 0;
  for (size_t d = 0; d < cfg.derived.size(); ++d) {
    const auto& spec = cfg.derived[d];
    size_t width = spec.approximate ? spec.lsh.bands : 1;
    for (size_t b = 0; b < width; ++b) {
      out.band_group[c0 + b] = u32(d);
      out.band_index[c0 + b] = u32(b);
    }
    for (size_t r = 0; r < table.rows; ++r) {
      if (table.is_missing(r, d)) {
        for (size_t b = 0; b < width; ++b) out.missing.set(r * cols + c0 + b, true);
        continue;
      }
      if (!spec.approximate) {
        out.cells[r * cols + c0] = table.at(r, d);
      } else {
        auto sigs = minhash_bands(qgrams(table.at(r, d), spec.lsh.q), spec.lsh, salt, u32(d));
        for (size_t b = 0; b < width; ++b) {
          std::string cell(8, '\0');
          store64_le(reinterpret_cast<u8*>(cell.data()), sigs[b]);
          out.cells[r * cols + c0 + b] = std::move(cell);
        }
      }
    }
    c0 += width;
  }
  return out;
}

}  // namespace pprs
