#include "pprs/score/score.hpp"

namespace pprs {

WeightShares share_weights(GateCtx& gates, int owner, const WeightVector* w, size_t attrs) {
  WeightShares ws;
  auto share_one = [&](double v, unsigned f) {
    std::vector<u64> enc{fixed_encode(v, f)};
    return gates.input_ring(owner, gates.party() == owner ? &enc : nullptr, 1);
  };
  unsigned f = w ? w->frac_bits : kDefaultFracBits;
  for (size_t j = 0; j < attrs; ++j) {
    ws.we.push_back(share_one(w ? w->we[j] : 0, f));
    ws.wn.push_back(share_one(w ? w->wn[j] : 0, f));
  }
  ws.threshold = share_one(w ? w->threshold : 0, f);
  return ws;
}

std::vector<BoolShares> band_or(GateCtx& gates, const std::vector<BoolShares>& columns,
                                const std::vector<u32>& group, size_t attrs) {
  if (columns.size() != group.size()) throw std::invalid_argument("band_or: group arity mismatch");
  std::vector<std::vector<size_t>> members(attrs);
  for (size_t c = 0; c < columns.size(); ++c) {
    if (group[c] >= attrs) throw std::invalid_argument("band_or: group id out of range");
    members[group[c]].push_back(c);
  }
  std::vector<BoolShares> out;
  for (size_t a = 0; a < attrs; ++a) {
    if (members[a].empty()) throw std::invalid_argument("band_or: attribute without columns");
    std::vector<BoolShares> acc;
    for (size_t c : members[a]) acc.push_back(columns[c]);
    while (acc.size() > 1) {
      std::vector<BoolShares> next;
      for (size_t p = 0; p + 1 < acc.size(); p += 2)
        next.push_back(gates.or_batch(acc[p], acc[p + 1]));
      if (acc.size() & 1) next.push_back(acc.back());
      acc = std::move(next);
    }
    out.push_back(std::move(acc[0]));
  }
  return out;
}

BoolShares decide_all_match(GateCtx& gates, const std::vector<BoolShares>& attrs) {
  if (attrs.empty()) throw std::invalid_argument("decide_all_match: no attributes");
  std::vector<BoolShares> acc = attrs;
  while (acc.size() > 1) {
    std::vector<BoolShares> next;
    for (size_t p = 0; p + 1 < acc.size(); p += 2)
      next.push_back(gates.and_batch(acc[p], acc[p + 1]));
    if (acc.size() & 1) next.push_back(acc.back());
    acc = std::move(next);
  }
  return acc[0];
}

ArithShares score_linear(GateCtx& gates, const std::vector<BoolShares>& attrs,
                         const WeightShares& ws, const WeightVector* plain_weights,
                         const BitVec* missing_mask, size_t rows, MissingMode mode) {
  if (attrs.empty() || ws.we.size() != attrs.size() || ws.wn.size() != attrs.size())
    throw std::invalid_argument("score_linear: weight/column arity mismatch");
  ArithShares s{gates.party(), std::vector<u64>(rows, 0)};
  for (size_t j = 0; j < attrs.size(); ++j) {
    ArithShares wev{gates.party(), std::vector<u64>(rows, ws.we[j].elems[0])};
    ArithShares wnv{gates.party(), std::vector<u64>(rows, ws.wn[j].elems[0])};
    ArithShares t1 = gates.mux(wev, attrs[j]);
    ArithShares t2 = gates.mux(wnv, gates.not_local(attrs[j]));
    for (size_t i = 0; i < rows; ++i) s.elems[i] += t1.elems[i] + t2.elems[i];
  }
  if (gates.party() == 0) {
    if (!missing_mask || !plain_weights)
      throw std::invalid_argument("score_linear: requester needs mask and plaintext weights");
    unsigned f = plain_weights->frac_bits;
    for (size_t i = 0; i < rows; ++i)
      for (size_t j = 0; j < attrs.size(); ++j)
        if (missing_mask->get(i * attrs.size() + j)) {
          u64 adj = fixed_encode(plain_weights->wm[j], f);
          // missing receiver cells always compare unmatched (fake domain),
          // so the replacement correction removes the wn contribution
          if (mode == MissingMode::replace) adj -= fixed_encode(plain_weights->wn[j], f);
          s.elems[i] += adj;
        }
  }
  return s;
}

BoolShares decide_threshold(GateCtx& gates, const ArithShares& score,
                            const ArithShares& threshold) {
  size_t n = score.size();
  u64 t = threshold.elems[0];
  ArithShares diff{gates.party(), std::vector<u64>(n)};
  for (size_t i = 0; i < n; ++i) {
    diff.elems[i] = t - score.elems[i];
    if (gates.party() == 0) diff.elems[i] -= 1;  // sign(t - s - 1) == [s >= t]
  }
  return gates.msb(diff);
}

CollabValue collaboration_value(GateCtx& gates, const BoolShares& decisions) {
  ArithShares lifted = gates.b2a(decisions);
  u64 acc = 0;
  for (u64 v : lifted.elems) acc += v;
  CollabValue out;
  out.share = ArithShares{gates.party(), {acc}};
  out.value = gates.reveal(out.share)[0];
  return out;
}

double expected_score_literal(const std::vector<double>& w, const std::vector<double>& p) {
  size_t m = w.size();
  if (m != p.size()) throw std::invalid_argument("calibrate: arity mismatch");
  if (m > 30) throw std::invalid_argument("calibrate: literal sum limited to m <= 30");
  double e = 0;
  for (u64 delta = 0; delta < (u64(1) << m); ++delta) {
    double score = 0, prob = 1;
    for (size_t j = 0; j < m; ++j) {
      if ((delta >> j) & 1) {
        score += w[j];
        prob *= p[j];
      } else {
        prob *= 1.0 - p[j];
      }
    }
    e += score * prob;
  }
  return e;
}

double expected_score_linear(const std::vector<double>& w, const std::vector<double>& p) {
  double e = 0;
  for (size_t j = 0; j < w.size(); ++j) e += w[j] * p[j];
  return e;
}

Calibration calibrate_weights(const CalibrationStats& stats, const std::vector<double>& w,
                              bool literal_sums) {
  size_t m = w.size();
  auto clamp01 = [](double v) { return std::min(1.0, std::max(0.0, v)); };
  std::vector<double> p1(m), p2(m);
  for (size_t j = 0; j < m; ++j) {
    double miss = j < stats.missing_rate.size() ? stats.missing_rate[j] : 0;
    double rep = j < stats.repetition_rate.size() ? stats.repetition_rate[j] : 0;
    p1[j] = clamp01(stats.p1[j] - miss);
    p2[j] = clamp01(stats.p2[j] + rep);
  }
  Calibration c;
  c.e1 = literal_sums ? expected_score_literal(w, p1) : expected_score_linear(w, p1);
  c.e2 = literal_sums ? expected_score_literal(w, p2) : expected_score_linear(w, p2);
  c.threshold = (c.e1 + c.e2) / 2;
  c.feasible = c.e1 > c.threshold && c.threshold > c.e2;
  return c;
}

}  // namespace pprs
