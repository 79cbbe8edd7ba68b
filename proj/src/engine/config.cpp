#include "pprs/engine/config.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace pprs {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

}  // namespace

RunConfig RunConfig::parse(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("config: expected key = value: " + line);
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }

  RunConfig cfg;
  auto get = [&](const std::string& k) -> std::optional<std::string> {
    auto it = kv.find(k);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };
  auto get_u64 = [&](const std::string& k, u64 def) {
    auto v = get(k);
    return v ? std::stoull(*v) : def;
  };
  auto get_double = [&](const std::string& k, double def) {
    auto v = get(k);
    return v ? std::stod(*v) : def;
  };
  auto get_bool = [&](const std::string& k, bool def) {
    auto v = get(k);
    if (!v) return def;
    return *v == "1" || *v == "true" || *v == "on";
  };

  if (auto v = get("role")) {
    if (*v == "requester" || *v == "0")
      cfg.role = 0;
    else if (*v == "candidate" || *v == "1")
      cfg.role = 1;
    else
      throw std::invalid_argument("config: role must be requester or candidate");
  }
  if (auto v = get("schema.mode")) {
    if (*v == "aware")
      cfg.schema_aware = true;
    else if (*v == "agnostic")
      cfg.schema_aware = false;
    else
      throw std::invalid_argument("config: schema.mode must be aware or agnostic");
  }

  cfg.lsh.bands = u32(get_u64("lsh.bands", 8));
  cfg.lsh.rows = u32(get_u64("lsh.rows", 4));
  cfg.lsh.q = u32(get_u64("lsh.q", 2));

  size_t nderived = get_u64("derived.count", 0);
  for (size_t d = 0; d < nderived; ++d) {
    std::string prefix = "derived." + std::to_string(d);
    auto src = get(prefix + ".sources");
    if (!src) throw std::invalid_argument("config: missing " + prefix + ".sources");
    cfg.derived_sources.push_back(split(*src, '+'));
    auto match = get(prefix + ".match").value_or("exact");
    if (match != "exact" && match != "approx")
      throw std::invalid_argument("config: match must be exact or approx");
    cfg.derived_approx.push_back(match == "approx");
    if (get(prefix + ".bands") || get(prefix + ".rows") || get(prefix + ".q")) {
      LshParams p = cfg.lsh;
      p.bands = u32(get_u64(prefix + ".bands", p.bands));
      p.rows = u32(get_u64(prefix + ".rows", p.rows));
      p.q = u32(get_u64(prefix + ".q", p.q));
      cfg.derived_lsh.push_back(p);
    } else {
      cfg.derived_lsh.push_back(std::nullopt);
    }
  }
  if (!cfg.schema_aware && nderived > 0)
    throw std::invalid_argument("config: agnostic mode derives its single attribute implicitly");
  if (!cfg.schema_aware) {
    cfg.derived_approx.assign(1, get("schema.agnostic_match").value_or("exact") == "approx");
  }

  if (auto v = get("score.model")) {
    if (*v == "all-match")
      cfg.model = ScoreModel::all_match;
    else if (*v == "linear")
      cfg.model = ScoreModel::linear;
    else
      throw std::invalid_argument("config: score.model must be all-match or linear");
  }
  cfg.frac_bits = unsigned(get_u64("fixed_point_bits", kDefaultFracBits));
  cfg.weights.frac_bits = cfg.frac_bits;
  size_t nattrs = cfg.schema_aware ? nderived : 1;
  for (size_t j = 0; j < std::max<size_t>(nattrs, 1); ++j) {
    std::string sj = std::to_string(j);
    cfg.weights.we.push_back(get_double("score.we." + sj, 1.0));
    cfg.weights.wn.push_back(get_double("score.wn." + sj, 0.0));
    cfg.weights.wm.push_back(get_double("score.wm." + sj, 0.0));
  }
  cfg.weights.threshold = get_double("score.threshold", 0.5);
  if (auto v = get("score.missing_mode")) {
    if (*v == "replace")
      cfg.missing_mode = MissingMode::replace;
    else if (*v == "add")
      cfg.missing_mode = MissingMode::add;
    else
      throw std::invalid_argument("config: score.missing_mode must be replace or add");
  }
  cfg.weights_public = get_bool("score.weights_public", false);

  cfg.binning.eps_percent = u32(get_u64("eps_percent", 27));
  cfg.binning.num_hash = u32(get_u64("hash_count", 3));
  cfg.binning.evict_limit = u32(get_u64("evict_limit", 500));
  cfg.binning.max_retries = u32(get_u64("max_retries", 8));
  cfg.digest_bits = unsigned(get_u64("digest_bits", 64));
  if (cfg.digest_bits != 64) throw std::invalid_argument("config: only digest_bits=64 supported");

  cfg.ot_mode = ot_mode_from_name(get("ot.mode").value_or("dealer"));
  cfg.ofa.tail_drop = get_bool("opt.tail_drop", true);
  cfg.ofa.partial_tables = get_bool("opt.partial_tables", true);
  cfg.ofa.bit_payload = get_bool("opt.bit_payload", true);

  cfg.seed = get_u64("seed", 1);
  cfg.reveal_decisions = get_bool("reveal_decisions", false);
  cfg.screen_threshold = get_u64("screen.threshold", 0);
  cfg.screen_parallel = get_u64("screen.parallel", 1);
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

SchemaConfig RunConfig::schema_for(const std::vector<std::string>& header) const {
  auto resolve = [&](const std::string& name) -> u32 {
    for (size_t c = 0; c < header.size(); ++c)
      if (header[c] == name) return u32(c);
    // allow plain indices
    try {
      size_t pos = 0;
      unsigned long v = std::stoul(name, &pos);
      if (pos == name.size() && v < header.size()) return u32(v);
    } catch (...) {
    }
    throw std::invalid_argument("config: unknown attribute '" + name + "'");
  };

  if (!schema_aware) {
    SchemaConfig s = SchemaConfig::agnostic(header.size(), derived_approx.at(0), lsh);
    return s;
  }
  if (derived_sources.empty())
    throw std::invalid_argument("config: schema-aware mode needs derived.count >= 1");
  SchemaConfig s;
  s.schema_aware = true;
  for (size_t d = 0; d < derived_sources.size(); ++d) {
    DerivedSpec spec;
    for (const auto& name : derived_sources[d]) spec.sources.push_back(resolve(name));
    spec.approximate = derived_approx[d];
    spec.lsh = derived_lsh[d] ? *derived_lsh[d] : lsh;
    s.derived.push_back(spec);
  }
  return s;
}

Bytes RunConfig::param_blob(const std::vector<std::string>& header) const {
  // weights and seeds are private; everything else must match bit-for-bit
  SchemaConfig s = schema_for(header);
  std::stringstream ss;
  ss << "v1;l=64;f=" << frac_bits << ";eps=" << binning.eps_percent << ";a=" << binning.num_hash
     << ";evict=" << binning.evict_limit << ";retries=" << binning.max_retries
     << ";digest=" << digest_bits << ";ot=" << ot_mode_name(ot_mode)
     << ";opt=" << ofa.tail_drop << ofa.partial_tables << ofa.bit_payload
     << ";model=" << (model == ScoreModel::all_match ? "all" : "linear")
     << ";miss=" << (missing_mode == MissingMode::replace ? "replace" : "add")
     << ";pubw=" << weights_public << ";aware=" << schema_aware << ";schema=";
  for (const auto& d : s.derived) {
    for (u32 src : d.sources) ss << src << "+";
    ss << ":" << d.approximate;
    if (d.approximate) ss << ":" << d.lsh.bands << "," << d.lsh.rows << "," << d.lsh.q;
    ss << "|";
  }
  if (weights_public) {
    // public weights are negotiated; private ones never enter the digest
    ss << ";w=";
    for (size_t j = 0; j < weights.we.size(); ++j)
      ss << weights.we[j] << "," << weights.wn[j] << "," << weights.wm[j] << "|";
    ss << weights.threshold;
  }
  std::string str = ss.str();
  return Bytes(str.begin(), str.end());
}

}  // namespace pprs
