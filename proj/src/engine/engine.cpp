#include "pprs/engine/engine.hpp"

#include <chrono>
#include <ostream>
#include <unordered_set>

#include "pprs/ofa/ofa.hpp"

namespace pprs {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Prg dealer_stream_from_salt(const std::array<u8, 32>& salt, u64 domain) {
  return Prg(salt.data(), 0).derive(domain);
}

std::vector<std::string> column_values(const DerivedTable& t, size_t col) {
  std::vector<std::string> v(t.rows);
  for (size_t r = 0; r < t.rows; ++r) v[r] = t.at(r, col);
  return v;
}

}  // namespace

std::array<u8, 32> derived_salt(u64 seed0, u64 seed1) {
  std::array<u8, 32> salt{};
  Prg r0 = Prg(seed0 ^ 0).derive(0x5a17);
  Prg r1 = Prg(seed1 ^ 1).derive(0x5a17);
  r0.fill(salt.data(), 16);
  r1.fill(salt.data() + 16, 16);
  return salt;
}

ScreeningOutcome run_screening(const RunConfig& cfg, const RecordTable& table, Channel& ch) {
  auto t0 = Clock::now();
  if (table.rows == 0) throw std::invalid_argument("screening: empty table");
  int party = cfg.role;

  // handshake: parameter digests must match before any protocol frame
  Prg rng = Prg(cfg.seed ^ u64(party)).derive(0x5a17);
  Bytes blob = cfg.param_blob(table.names);
  HandshakeResult hs = handshake(ch, party, blob, rng, cfg.reveal_decisions);

  // one logical session per attribute instance multiplexes on the channel;
  // session 0 carries metadata and the score phase
  ch.enable_sessions(0);

  // record counts are public metadata
  ch.counters().set_phase("meta");
  {
    Bytes mine(8);
    store64_le(mine.data(), table.rows);
    ch.send_frame(FrameType::SCREEN_META, mine);
  }
  Bytes peer_meta = ch.recv_frame(FrameType::SCREEN_META);
  size_t n_peer = load64_le(peer_meta.data());
  size_t n0 = party == 0 ? table.rows : n_peer;  // receiver's record count
  size_t bins = table_bins(n0, cfg.binning.eps_percent);

  // session services
  std::optional<Prg> ot_dealer, triple_dealer;
  if (cfg.ot_mode == OtMode::dealer) ot_dealer = dealer_stream_from_salt(hs.salt, 0x07de);
  triple_dealer = dealer_stream_from_salt(hs.salt, 0x371e);
  OtService ot(cfg.ot_mode, party, ch, rng.derive(0x07), ot_dealer);
  TriplePool pool(TriplePool::Kind::boolean);
  if (cfg.ot_mode == OtMode::dealer) {
    Prg dealer = *triple_dealer;
    pool.set_bool_refill([party, dealer](size_t need, std::vector<u64>& a, std::vector<u64>& b,
                                         std::vector<u64>& c) mutable {
      dealer_bool_triples(dealer, party, need, a, b, c);
    });
  } else {
    Prg trng = rng.derive(0x77);
    Channel* chp = &ch;
    OtService* otp = &ot;
    pool.set_bool_refill([party, chp, otp, trng](size_t need, std::vector<u64>& a,
                                                 std::vector<u64>& b, std::vector<u64>& c) mutable {
      ot_bool_triples(party, *chp, *otp, trng, need, a, b, c);
    });
  }
  GateCtx gates(party, ch, ot, pool, rng.derive(0x99));

  // feature engineering (local)
  SchemaConfig schema = cfg.schema_for(table.names);
  RecordTable derived = derive_attributes(table, schema);
  DerivedTable dt = expand_lsh(derived, schema, hs.salt);
  size_t attrs = schema.derived.size();

  ScreeningOutcome out;
  out.salt = hs.salt;
  out.n_local = table.rows;
  out.n_peer = n_peer;
  out.derived_cols = dt.cols;
  out.attrs = attrs;
  out.insecure_dealer = ot.insecure_dealer();

  // per derived column: membership shares, then alignment to record order
  if (dt.cols > 0xFFFE) throw std::invalid_argument("screening: too many derived columns");
  std::vector<BoolShares> aligned;
  Prg bin_rng = rng.derive(0xb1);
  for (size_t col = 0; col < dt.cols; ++col) {
    ch.set_session(u16(col + 1));
    std::vector<u64> digests =
        digest_values(column_values(dt, col), dt.missing, col, dt.cols, hs.salt, u32(col), party);
    if (party == 0) {
      CpsiResult cp = cpsi_attribute_receiver(gates, ch, bin_rng, digests, bins, hs.salt, u32(col),
                                              cfg.binning);
      out.max_beta = std::max(out.max_beta, cp.beta);
      out.total_retries += cp.retries;
      SwitchProgram prog = decompose_extended(*cp.ep, cfg.ofa.tail_drop);
      OfaOutput of = ofa_programmer(ch, ot, prog, cp.membership.bits, cfg.ofa);
      if (cfg.ofa.bit_payload) {
        aligned.push_back(std::move(of.bits));
      } else {
        BoolShares s{party, BitVec(of.words.size())};
        for (size_t i = 0; i < of.words.size(); ++i) s.bits.set(i, of.words[i] & 1);
        aligned.push_back(std::move(s));
      }
    } else {
      CpsiResult cp =
          cpsi_attribute_sender(gates, ch, bin_rng, digests, bins, hs.salt, u32(col), cfg.binning);
      out.max_beta = std::max(out.max_beta, cp.beta);
      out.total_retries += cp.retries;
      OfaOutput of = ofa_labeler(ch, ot, bins, n0, cp.membership.bits, cfg.ofa, rng.derive(col));
      if (cfg.ofa.bit_payload) {
        aligned.push_back(std::move(of.bits));
      } else {
        BoolShares s{party, BitVec(of.words.size())};
        for (size_t i = 0; i < of.words.size(); ++i) s.bits.set(i, of.words[i] & 1);
        aligned.push_back(std::move(s));
      }
    }
  }

  // score
  ch.set_session(0);
  ch.counters().set_phase("score");
  std::vector<BoolShares> per_attr = band_or(gates, aligned, dt.band_group, attrs);
  BoolShares decisions{party, BitVec(n0)};
  if (cfg.model == ScoreModel::all_match) {
    decisions = decide_all_match(gates, per_attr);
  } else {
    WeightShares ws;
    if (cfg.weights_public) {
      // both parties hold the (digest-checked) weights; trivial sharing
      unsigned f = cfg.weights.frac_bits;
      auto own = [&](double v) {
        return ArithShares{party, {party == 0 ? fixed_encode(v, f) : 0}};
      };
      for (size_t j = 0; j < attrs; ++j) {
        ws.we.push_back(own(cfg.weights.we[j]));
        ws.wn.push_back(own(cfg.weights.wn[j]));
      }
      ws.threshold = own(cfg.weights.threshold);
    } else {
      int owner = 0;
      ws = share_weights(gates, owner, party == owner ? &cfg.weights : nullptr, attrs);
    }
    BitVec mask;
    if (party == 0) {
      mask = BitVec(n0 * attrs);
      for (size_t r = 0; r < n0; ++r)
        for (size_t a = 0; a < attrs; ++a) mask.set(r * attrs + a, derived.is_missing(r, a));
    }
    ArithShares s = score_linear(gates, per_attr, ws, party == 0 ? &cfg.weights : nullptr,
                                 party == 0 ? &mask : nullptr, n0, cfg.missing_mode);
    decisions = decide_threshold(gates, s, ws.threshold);
  }

  CollabValue cv = collaboration_value(gates, decisions);
  out.c = cv.value;

  if (hs.reveal_decisions) out.decisions = gates.reveal(decisions);

  // reveal discipline: without the opt-in, c is the only value that crossed
  out.reveal_calls = gates.reveal_calls();
  out.revealed_values = gates.revealed_values();
  if (!hs.reveal_decisions && (out.reveal_calls != 1 || out.revealed_values != 1))
    throw std::logic_error("screening: reveal discipline violated");

  PhaseCounters totals = ch.counters().totals();
  out.bytes_sent = totals.bytes_sent;
  out.bytes_recv = totals.bytes_recv;
  out.rounds = totals.rounds;
  out.traffic = ch.counters().snapshot();
  out.logical_ots = ot.stats().logical_ots;
  out.wall_micros = u64(seconds_since(t0) * 1e6);
  return out;
}

OracleOutcome plaintext_oracle(const RecordTable& t0, const RecordTable& t1, const RunConfig& cfg,
                               const std::array<u8, 32>& salt) {
  SchemaConfig schema = cfg.schema_for(t0.names);
  RecordTable d0 = derive_attributes(t0, schema);
  RecordTable d1 = derive_attributes(t1, schema);
  DerivedTable e0 = expand_lsh(d0, schema, salt);
  DerivedTable e1 = expand_lsh(d1, schema, salt);
  size_t attrs = schema.derived.size();
  size_t n = t0.rows;

  // per column: set membership against the candidate's column values
  std::vector<BitVec> col_match(e0.cols, BitVec(n));
  for (size_t c = 0; c < e0.cols; ++c) {
    std::unordered_set<std::string> peer;
    for (size_t r = 0; r < e1.rows; ++r)
      if (!e1.is_missing(r, c)) peer.insert(e1.at(r, c));
    for (size_t r = 0; r < n; ++r)
      if (!e0.is_missing(r, c) && peer.count(e0.at(r, c))) col_match[c].set(r, true);
  }

  // band OR within each attribute's columns
  std::vector<BitVec> attr_match(attrs, BitVec(n));
  for (size_t c = 0; c < e0.cols; ++c) attr_match[e0.band_group[c]] |= col_match[c];

  OracleOutcome out;
  out.decisions = BitVec(n);
  if (cfg.model == ScoreModel::all_match) {
    for (size_t r = 0; r < n; ++r) {
      bool all = true;
      for (size_t a = 0; a < attrs; ++a) all = all && attr_match[a].get(r);
      out.decisions.set(r, all);
    }
  } else {
    unsigned f = cfg.weights.frac_bits;
    u64 t = fixed_encode(cfg.weights.threshold, f);
    for (size_t r = 0; r < n; ++r) {
      u64 s = 0;  // the exact ring arithmetic the protocol performs
      for (size_t a = 0; a < attrs; ++a) {
        s += attr_match[a].get(r) ? fixed_encode(cfg.weights.we[a], f)
                                  : fixed_encode(cfg.weights.wn[a], f);
        if (d0.is_missing(r, a)) {
          u64 adj = fixed_encode(cfg.weights.wm[a], f);
          if (cfg.missing_mode == MissingMode::replace) adj -= fixed_encode(cfg.weights.wn[a], f);
          s += adj;
        }
      }
      out.decisions.set(r, ((t - s - 1) >> 63) & 1);  // s >= t
    }
  }
  out.c = out.decisions.popcount();
  return out;
}

// --- screening -------------------------------------------------------------

u64 pprl_stub_requester(const RecordTable& table, Channel& ch) {
  ch.counters().set_phase("pprl-stub");
  Bytes go(1, 1);
  ch.send_frame(FrameType::SCREEN_META, go);
  Bytes blobful = ch.recv_frame(FrameType::SCREEN_META);
  // candidate's full normalized keys, length-prefixed (plaintext: the stub is
  // NOT private and stands in for an external PPRL system)
  std::unordered_set<std::string> peer;
  size_t at = 0;
  while (at + 4 <= blobful.size()) {
    u32 len = load32_be(blobful.data() + at);
    at += 4;
    peer.insert(std::string(reinterpret_cast<const char*>(blobful.data() + at), len));
    at += len;
  }
  u64 linked = 0;
  for (size_t r = 0; r < table.rows; ++r) {
    std::string key;
    for (size_t c = 0; c < table.cols; ++c) {
      if (c) key += kFieldSeparator;
      if (!table.is_missing(r, c)) key += table.at(r, c);
    }
    if (peer.count(key)) ++linked;
  }
  return linked;
}

void pprl_stub_candidate(const RecordTable& table, Channel& ch) {
  ch.counters().set_phase("pprl-stub");
  Bytes payload;
  for (size_t r = 0; r < table.rows; ++r) {
    std::string key;
    for (size_t c = 0; c < table.cols; ++c) {
      if (c) key += kFieldSeparator;
      if (!table.is_missing(r, c)) key += table.at(r, c);
    }
    size_t at = payload.size();
    payload.resize(at + 4 + key.size());
    store32_be(payload.data() + at, u32(key.size()));
    std::memcpy(payload.data() + at + 4, key.data(), key.size());
  }
  ch.send_frame(FrameType::SCREEN_META, payload);
}

ScreeningReport screen_then_link(const RunConfig& cfg, const RecordTable& table,
                                 const std::vector<std::pair<std::string, ChannelFactory>>& candidates) {
  if (cfg.role != 0) throw std::invalid_argument("screen_then_link: requester role required");
  ScreeningReport rep;
  rep.threshold = cfg.screen_threshold;
  rep.insecure_dealer = cfg.ot_mode == OtMode::dealer;
  rep.candidates.resize(candidates.size());

  std::vector<std::unique_ptr<Channel>> kept(candidates.size());

  // candidates screen sequentially by default; the parallelism knob runs
  // waves of k, each on its own channel and session state
  size_t wave = std::max<size_t>(1, cfg.screen_parallel);
  for (size_t start = 0; start < candidates.size(); start += wave) {
    size_t end = std::min(candidates.size(), start + wave);
    std::vector<std::thread> threads;
    for (size_t i = start; i < end; ++i) {
      threads.emplace_back([&, i] {
        CandidateReport& cr = rep.candidates[i];
        cr.label = candidates[i].first;
        std::unique_ptr<Channel> ch;
        try {
          ch = candidates[i].second();
          auto t0 = Clock::now();
          ScreeningOutcome outcome = run_screening(cfg, table, *ch);
          cr.pprs_seconds = seconds_since(t0);
          cr.c = outcome.c;
          cr.passed = outcome.c > cfg.screen_threshold;  // strict, per the framework
          cr.bytes = outcome.bytes_sent + outcome.bytes_recv;
          cr.ots = outcome.logical_ots;
          cr.traffic = std::move(outcome.traffic);
          cr.decisions = std::move(outcome.decisions);
        } catch (const std::exception& e) {
          cr.errored = true;  // one failing candidate never aborts the loop
          cr.error = e.what();
          return;
        }
        if (cr.passed) {
          kept[i] = std::move(ch);
        } else {
          Bytes stop(1, 0);
          ch->counters().set_phase("pprl-stub");
          ch->set_session(0);
          ch->send_frame(FrameType::SCREEN_META, stop);
        }
      });
    }
    for (auto& t : threads) t.join();
  }

  struct Passing {
    size_t index;
    std::unique_ptr<Channel> ch;
  };
  std::vector<Passing> passing;
  for (size_t i = 0; i < kept.size(); ++i)
    if (kept[i]) passing.push_back(Passing{i, std::move(kept[i])});

  for (auto& p : passing) {
    CandidateReport& cr = rep.candidates[p.index];
    try {
      auto t0 = Clock::now();
      cr.linked_records = pprl_stub_requester(table, *p.ch);
      cr.pprl_seconds = seconds_since(t0);
      cr.pprl_invoked = true;
    } catch (const std::exception& e) {
      cr.errored = true;
      cr.error = e.what();
    }
  }

  size_t ok = 0, invoked = 0;
  for (const auto& cr : rep.candidates) {
    if (cr.errored) continue;
    ok++;
    rep.t_pprs += cr.pprs_seconds;
    if (cr.passed) rep.alpha += 1;
    if (cr.pprl_invoked) {
      invoked++;
      rep.t_pprl += cr.pprl_seconds;
    }
  }
  if (ok) {
    rep.alpha /= double(ok);
    rep.t_pprs /= double(ok);
  }
  if (invoked) {
    rep.t_pprl /= double(invoked);
    rep.gamma = rep.t_pprs / rep.t_pprl + rep.alpha;
    rep.gamma_valid = true;
  }
  return rep;
}

void screen_serve(const RunConfig& cfg, const RecordTable& table, Channel& ch) {
  RunConfig mine = cfg;
  mine.role = 1;
  run_screening(mine, table, ch);
  Bytes go = ch.recv_frame(FrameType::SCREEN_META);
  if (go.size() == 1 && go[0] == 1) pprl_stub_candidate(table, ch);
}

void write_report(std::ostream& os, const ScreeningReport& r) {
  os << "[summary]\n";
  os << "candidates = " << r.candidates.size() << "\n";
  os << "threshold = " << r.threshold << "\n";
  os << "alpha = " << r.alpha << "\n";
  os << "t_pprs_seconds = " << r.t_pprs << "\n";
  if (r.gamma_valid) {
    os << "t_pprl_seconds = " << r.t_pprl << "\n";
    os << "gamma = " << r.gamma << "\n";
  }
  os << "pprl_stub_nonprivate = 1\n";
  if (r.insecure_dealer) os << "ot_mode_warning = dealer randomness is NOT secure (test mode)\n";
  for (size_t i = 0; i < r.candidates.size(); ++i) {
    const CandidateReport& c = r.candidates[i];
    os << "\n[candidate " << i << "]\n";
    os << "label = " << c.label << "\n";
    if (c.errored) {
      os << "errored = 1\nerror = " << c.error << "\n";
      continue;
    }
    os << "c = " << c.c << "\n";
    os << "passed = " << (c.passed ? 1 : 0) << "\n";
    os << "pprs_seconds = " << c.pprs_seconds << "\n";
    os << "bytes = " << c.bytes << "\n";
    os << "ots = " << c.ots << "\n";
    for (const auto& [label, pc] : c.traffic)
      os << "phase." << label << " = sent " << pc.bytes_sent << " recv " << pc.bytes_recv
         << " rounds " << pc.rounds << "\n";
    if (c.decisions) {
      os << "decisions = ";
      for (size_t j = 0; j < c.decisions->size(); ++j) os << (c.decisions->get(j) ? '1' : '0');
      os << "\n";
    }
    if (c.pprl_invoked) {
      os << "pprl_seconds = " << c.pprl_seconds << "\n";
      os << "linked_records = " << c.linked_records << "\n";
    }
  }
}

// --- benchmark ---------------------------------------------------------------

void run_pair(const std::function<void(Channel&)>& p0, const std::function<void(Channel&)>& p1) {
  auto [c0, c1] = make_inmem_pair();
  std::exception_ptr e0, e1;
  std::thread t0([&] {
    try {
      p0(*c0);
    } catch (...) {
      e0 = std::current_exception();
    }
  });
  std::thread t1([&] {
    try {
      p1(*c1);
    } catch (...) {
      e1 = std::current_exception();
    }
  });
  t0.join();
  t1.join();
  if (e0) std::rethrow_exception(e0);
  if (e1) std::rethrow_exception(e1);
}

const std::vector<std::pair<std::string, OfaOptions>>& bench_variants() {
  static const std::vector<std::pair<std::string, OfaOptions>> v = {
      {"oep", OfaOptions{false, false, false}},
      {"opt1", OfaOptions{true, false, false}},
      {"opt1+2", OfaOptions{true, true, false}},
      {"ofa", OfaOptions{true, true, true}},
  };
  return v;
}

OfaBenchRow bench_alignment(size_t n, u32 eps_percent, const OfaOptions& opt, u64 seed) {
  // realistic extended permutation: cuckoo-hash records with ~10% duplicates
  Prg rng(seed);
  size_t bins = table_bins(n, eps_percent);
  std::array<u8, 32> salt{};
  rng.fill(salt.data(), 32);

  size_t distinct_n = std::max<size_t>(1, n - n / 10);
  std::vector<u64> values(distinct_n);
  for (auto& v : values) {
    do {
      v = rng.next_u64();
    } while (digest_is_reserved(v));
  }
  std::vector<u64> records(n);
  for (size_t i = 0; i < n; ++i)
    records[i] = i < distinct_n ? values[i] : values[rng.next_below(distinct_n)];

  BinKeys keys = derive_bin_keys(salt, 0, 0, 3, bins);
  Prg crng = rng.derive(7);
  CuckooTable table = cuckoo_insert(values, keys, 500, crng);
  ExtendedPermutation ep = extended_perm_from_cuckoo(table, records);
  SwitchProgram prog = decompose_extended(ep, opt.tail_drop);

  BitVec share0 = rng.next_bits(bins), share1 = rng.next_bits(bins);

  OfaBenchRow row;
  row.n = n;
  row.eps_percent = eps_percent;
  row.switches = prog.shape.switches.size();

  run_pair(
      [&](Channel& ch) {
        Prg r0(seed ^ 0xA0);
        Prg dealer = dealer_stream_from_salt(salt, 0x07de);
        OtService ot(OtMode::dealer, 0, ch, r0, dealer);
        auto t0 = Clock::now();
        OfaOutput out = ofa_programmer(ch, ot, prog, share0, opt);
        row.seconds = seconds_since(t0);
        row.ots = out.report.total_ots();
        row.bytes = out.report.total_bytes();
      },
      [&](Channel& ch) {
        Prg r1(seed ^ 0xB1);
        Prg dealer = dealer_stream_from_salt(salt, 0x07de);
        OtService ot(OtMode::dealer, 1, ch, r1, dealer);
        ofa_labeler(ch, ot, bins, n, share1, opt, r1.derive(3));
      });
  for (const auto& [name, o] : bench_variants())
    if (o.tail_drop == opt.tail_drop && o.partial_tables == opt.partial_tables &&
        o.bit_payload == opt.bit_payload)
      row.variant = name;
  if (row.variant.empty()) row.variant = "custom";
  return row;
}

}  // namespace pprs
