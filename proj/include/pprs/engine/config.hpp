#pragma once

#include <optional>

#include "pprs/binning/binning.hpp"
#include "pprs/features/features.hpp"
#include "pprs/ofa/ofa.hpp"
#include "pprs/ot/ot.hpp"
#include "pprs/score/score.hpp"

namespace pprs {

enum class ScoreModel { all_match, linear };

// Flat key=value run configuration. Keys are documented in the README and in
// parse() below; '#' starts a comment.
struct RunConfig {
  int role = 0;  // 0 requester, 1 candidate

  bool schema_aware = true;
  // per derived attribute: source column names (resolved against the CSV
  // header) or zero-based indices
  std::vector<std::vector<std::string>> derived_sources;
  std::vector<bool> derived_approx;
  std::vector<std::optional<LshParams>> derived_lsh;
  LshParams lsh;  // default for approximate attributes

  ScoreModel model = ScoreModel::all_match;
  WeightVector weights;
  MissingMode missing_mode = MissingMode::replace;
  bool weights_public = false;

  BinningParams binning;
  unsigned digest_bits = 64;
  unsigned frac_bits = kDefaultFracBits;
  OtMode ot_mode = OtMode::dealer;
  OfaOptions ofa;
  u64 seed = 1;
  bool reveal_decisions = false;
  u64 screen_threshold = 0;
  size_t screen_parallel = 1;

  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::string& path);

  // schema resolved against a concrete table
  SchemaConfig schema_for(const std::vector<std::string>& header) const;

  // canonical encoding of every negotiated parameter; handshake digests it
  Bytes param_blob(const std::vector<std::string>& header) const;
};

}  // namespace pprs
