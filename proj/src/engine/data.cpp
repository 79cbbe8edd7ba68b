#include "pprs/engine/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "pprs/crypto/chacha.hpp"

namespace pprs {

std::string normalize_value(const std::string& raw) {
  size_t a = raw.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = raw.find_last_not_of(" \t\r\n");
  std::string s = raw.substr(a, b - a + 1);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (s.find(kFieldSeparator) != std::string::npos)
    throw std::invalid_argument("value contains the reserved separator U+241F");
  return s;
}

namespace {

std::vector<std::string> parse_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

RecordTable parse_csv(const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && ss.eof()) break;
    rows.push_back(parse_csv_line(line));
  }
  if (rows.empty()) throw std::runtime_error("csv: empty file");
  size_t cols = rows[0].size();
  for (auto& r : rows)
    if (r.size() != cols) throw std::runtime_error("csv: ragged row");
  {
    std::vector<std::string> header;
    for (auto& h : rows[0]) header.push_back(normalize_value(h));
    std::vector<std::string> dedup = header;
    std::sort(dedup.begin(), dedup.end());
    if (std::adjacent_find(dedup.begin(), dedup.end()) != dedup.end())
      throw std::runtime_error("csv: duplicate header names");
    rows[0] = header;
  }

  RecordTable t = RecordTable::make(rows.size() - 1, cols);
  t.names = rows[0];
  for (size_t r = 1; r < rows.size(); ++r)
    for (size_t c = 0; c < cols; ++c) {
      std::string v = normalize_value(rows[r][c]);
      t.at(r - 1, c) = v;
      if (v.empty()) t.set_missing(r - 1, c, true);
    }
  return t;
}

RecordTable load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open csv " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

void save_csv(const RecordTable& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write csv " + path);
  auto field = [](const std::string& v) {
    if (v.find(',') == std::string::npos && v.find('"') == std::string::npos) return v;
    std::string q = "\"";
    for (char c : v) {
      if (c == '"') q += "\"\"";
      else q += c;
    }
    return q + "\"";
  };
  for (size_t c = 0; c < t.cols; ++c) out << (c ? "," : "") << field(t.names[c]);
  out << "\n";
  for (size_t r = 0; r < t.rows; ++r) {
    for (size_t c = 0; c < t.cols; ++c)
      out << (c ? "," : "") << (t.is_missing(r, c) ? "" : field(t.at(r, c)));
    out << "\n";
  }
}

namespace {

const char* kCities[] = {"arlton", "bexley", "corwen", "duffield", "eastham", "farnley",
                         "girton", "hadley", "ilford", "jesmond",  "kelso",   "lydney"};

// full-alphabet consonant/vowel syllables keep the q-gram space large enough
// that unrelated records have low Jaccard similarity
std::string make_name(Prg& g, int syllables) {
  static const char vowels[] = "aeiou";
  static const char consonants[] = "bcdfghjklmnpqrstvwxz";
  std::string s;
  for (int i = 0; i < syllables; ++i) {
    s += consonants[g.next_below(20)];
    s += vowels[g.next_below(5)];
    if (g.next_below(2) == 0) s += consonants[g.next_below(20)];
  }
  return s;
}

struct Entity {
  std::string given, family, street, city;
};

Entity make_entity(u64 id, Prg& g) {
  Entity e;
  e.given = make_name(g, 4 + int(g.next_below(2)));
  e.family = make_name(g, 5 + int(g.next_below(2)));
  // unique street number keeps full records distinct across entities
  e.street = std::to_string(10000 + id) + " " + make_name(g, 6);
  e.city = kCities[g.next_below(std::size(kCities))];
  return e;
}

void apply_typos(std::string& s, Prg& g, int edits) {
  for (int e = 0; e < edits; ++e) {
    if (s.empty()) return;
    size_t pos = g.next_below(s.size());
    char c = char('a' + g.next_below(26));
    switch (g.next_below(3)) {
      case 0: s[pos] = c; break;
      case 1: s.insert(s.begin() + pos, c); break;
      default: s.erase(s.begin() + pos); break;
    }
  }
}

}  // namespace

Synthetic gen_synthetic(const GenSpec& spec) {
  for (double r : {spec.typo_rate, spec.dup_rate, spec.missing_rate, spec.overlap})
    if (r < 0 || r > 1) throw std::invalid_argument("gen_synthetic: rates must be in [0,1]");
  Prg g(spec.seed);
  Prg gperturb = g.derive(1);
  Prg gshuffle = g.derive(2);

  size_t n = spec.n;
  size_t n_overlap = size_t(std::llround(spec.overlap * double(n)));
  size_t n_dup = size_t(std::llround(spec.dup_rate * double(n)));
  size_t n_fresh = n - n_dup;  // originals per table
  if (n_overlap > n_fresh) n_overlap = n_fresh;

  std::vector<std::string> names = {"given_name", "family_name", "street", "city"};
  auto blank = [&](RecordTable& t, size_t r, Prg& rng) {
    for (size_t c = 0; c < t.cols; ++c)
      if (rng.next_below(1000000) < u64(spec.missing_rate * 1e6)) {
        t.at(r, c).clear();
        t.set_missing(r, c, true);
      }
  };

  Synthetic out;
  out.t0 = RecordTable::make(n, 4);
  out.t1 = RecordTable::make(n, 4);
  out.t0.names = out.t1.names = names;

  std::vector<u64> entity0(n), entity1(n);
  u64 next_entity = 0;

  // originals: the first n_overlap entities appear in both tables
  for (size_t r = 0; r < n_fresh; ++r) {
    u64 id = next_entity++;
    Entity e = make_entity(id, g);
    entity0[r] = id;
    out.t0.at(r, 0) = e.given;
    out.t0.at(r, 1) = e.family;
    out.t0.at(r, 2) = e.street;
    out.t0.at(r, 3) = e.city;
  }
  for (size_t r = 0; r < n_fresh; ++r) {
    if (r < n_overlap) {
      u64 id = entity0[r];
      entity1[r] = id;
      for (size_t c = 0; c < 4; ++c) out.t1.at(r, c) = out.t0.at(r, c);
      if (gperturb.next_below(1000000) < u64(spec.typo_rate * 1e6)) {
        // 1-2 character edits on one of the name/street fields
        size_t c = gperturb.next_below(3);
        std::string v = out.t1.at(r, c);
        apply_typos(v, gperturb, 1 + int(gperturb.next_below(2)));
        out.t1.at(r, c) = v;
      }
    } else {
      u64 id = next_entity++;
      Entity e = make_entity(id, g);
      entity1[r] = id;
      out.t1.at(r, 0) = e.given;
      out.t1.at(r, 1) = e.family;
      out.t1.at(r, 2) = e.street;
      out.t1.at(r, 3) = e.city;
    }
  }

  // duplicates copy earlier rows verbatim
  for (size_t r = n_fresh; r < n; ++r) {
    size_t src0 = gperturb.next_below(n_fresh);
    size_t src1 = gperturb.next_below(n_fresh);
    entity0[r] = entity0[src0];
    entity1[r] = entity1[src1];
    for (size_t c = 0; c < 4; ++c) {
      out.t0.at(r, c) = out.t0.at(src0, c);
      out.t1.at(r, c) = out.t1.at(src1, c);
    }
  }
  out.dup_count0 = out.dup_count1 = n - n_fresh;

  for (size_t r = 0; r < n; ++r) {
    blank(out.t0, r, gperturb);
    blank(out.t1, r, gperturb);
  }

  // shuffle the candidate table so record orders differ
  std::vector<u32> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[gshuffle.next_below(i)]);
  RecordTable shuffled = RecordTable::make(n, 4);
  shuffled.names = names;
  std::vector<u64> entity1s(n);
  for (size_t r = 0; r < n; ++r) {
    entity1s[r] = entity1[perm[r]];
    for (size_t c = 0; c < 4; ++c) {
      shuffled.at(r, c) = out.t1.at(perm[r], c);
      shuffled.missing.set(r * 4 + c, out.t1.is_missing(perm[r], c));
    }
  }
  out.t1 = std::move(shuffled);

  out.truth0 = BitVec(n);
  std::unordered_map<u64, std::vector<u32>> by_entity;
  for (size_t j = 0; j < n; ++j) by_entity[entity1s[j]].push_back(u32(j));
  for (size_t i = 0; i < n; ++i) {
    auto it = by_entity.find(entity0[i]);
    if (it == by_entity.end()) continue;
    out.truth0.set(i, true);
    for (u32 j : it->second) out.links.emplace_back(u32(i), j);
  }
  return out;
}

}  // namespace pprs
