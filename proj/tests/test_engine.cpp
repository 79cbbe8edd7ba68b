#include <doctest.h>

#include <atomic>
#include <sstream>

#include "pprs/engine/engine.hpp"

using namespace pprs;

namespace {

RunConfig base_config() {
  return RunConfig::parse(
      "schema.mode = aware\n"
      "derived.count = 2\n"
      "derived.0.sources = given_name+family_name\n"
      "derived.0.match = exact\n"
      "derived.1.sources = street+city\n"
      "derived.1.match = exact\n"
      "score.model = all-match\n"
      "ot.mode = dealer\n"
      "seed = 5\n");
}

std::pair<ScreeningOutcome, ScreeningOutcome> run_both(RunConfig cfg, const RecordTable& t0,
                                                       const RecordTable& t1) {
  RunConfig cfg0 = cfg, cfg1 = cfg;
  cfg0.role = 0;
  cfg1.role = 1;
  ScreeningOutcome o0, o1;
  run_pair([&](Channel& ch) { o0 = run_screening(cfg0, t0, ch); },
           [&](Channel& ch) { o1 = run_screening(cfg1, t1, ch); });
  return {o0, o1};
}

}  // namespace

TEST_CASE("config parsing") {
  RunConfig cfg = base_config();
  CHECK(cfg.schema_aware);
  CHECK(cfg.derived_sources.size() == 2);
  CHECK(cfg.derived_sources[0] == std::vector<std::string>{"given_name", "family_name"});
  CHECK(cfg.model == ScoreModel::all_match);
  CHECK(cfg.ot_mode == OtMode::dealer);
  CHECK(cfg.seed == 5);

  CHECK_THROWS(RunConfig::parse("role = nobody\n"));
  CHECK_THROWS(RunConfig::parse("just a line without equals\n"));

  RunConfig ag = RunConfig::parse("schema.mode = agnostic\nschema.agnostic_match = approx\n");
  CHECK(!ag.schema_aware);
  SchemaConfig s = ag.schema_for({"a", "b", "c"});
  CHECK(s.derived.size() == 1);
  CHECK(s.derived[0].sources.size() == 3);
  CHECK(s.derived[0].approximate);
}

TEST_CASE("param blob covers negotiated parameters") {
  RunConfig a = base_config();
  RunConfig b = base_config();
  std::vector<std::string> hdr = {"given_name", "family_name", "street", "city"};
  CHECK(a.param_blob(hdr) == b.param_blob(hdr));
  b.lsh.bands = 9;
  b.derived_approx[0] = true;
  CHECK(a.param_blob(hdr) != b.param_blob(hdr));
  RunConfig c = base_config();
  c.ofa.bit_payload = false;
  CHECK(a.param_blob(hdr) != c.param_blob(hdr));
}

TEST_CASE("csv parse and normalization") {
  RecordTable t = parse_csv("Name,City\n\" Ann \",ROME\nbob,\n");
  CHECK(t.rows == 2);
  CHECK(t.names == std::vector<std::string>{"name", "city"});
  CHECK(t.at(0, 0) == "ann");
  CHECK(t.at(0, 1) == "rome");
  CHECK(t.is_missing(1, 1));
  CHECK(!t.is_missing(1, 0));

  CHECK_THROWS(parse_csv("a,b\n1\n"));        // ragged
  CHECK_THROWS(parse_csv("a,a\n1,2\n"));      // duplicate header
  CHECK_THROWS(parse_csv("a,b\nx" + kFieldSeparator + "y,2\n"));  // reserved separator
}

TEST_CASE("synthetic generator basics") {
  GenSpec spec;
  spec.n = 200;
  spec.overlap = 1.0;
  spec.seed = 9;
  Synthetic syn = gen_synthetic(spec);
  CHECK(syn.truth0.popcount() == 200);  // full overlap, all rows linked

  spec.overlap = 0.0;
  Synthetic none = gen_synthetic(spec);
  CHECK(none.truth0.popcount() == 0);
  CHECK(none.links.empty());

  // duplication count is exact by construction
  GenSpec dup;
  dup.n = 1000;
  dup.dup_rate = 0.1;
  dup.seed = 10;
  Synthetic d = gen_synthetic(dup);
  CHECK(d.dup_count0 == 100);
  CHECK(d.t0.rows == 1000);

  // determinism
  Synthetic again = gen_synthetic(dup);
  CHECK(again.t0.cells == d.t0.cells);
  CHECK(again.t1.cells == d.t1.cells);
}

TEST_CASE("identical and disjoint tables") {
  GenSpec spec;
  spec.n = 100;
  spec.overlap = 1.0;
  spec.seed = 30;
  Synthetic syn = gen_synthetic(spec);
  RunConfig cfg = base_config();
  auto [same0, same1] = run_both(cfg, syn.t0, syn.t0);  // literally the same table
  CHECK(same0.c == 100);
  CHECK(same1.c == 100);

  GenSpec dis;
  dis.n = 100;
  dis.overlap = 0.0;
  dis.seed = 30;
  Synthetic d = gen_synthetic(dis);
  auto [d0, d1] = run_both(cfg, d.t0, d.t1);
  CHECK(d0.c == 0);
  CHECK(d1.c == 0);
}

TEST_CASE("protocol equals oracle: exact all-match") {
  GenSpec spec;
  spec.n = 120;
  spec.overlap = 0.4;
  spec.seed = 31;
  Synthetic syn = gen_synthetic(spec);
  RunConfig cfg = base_config();
  auto [o0, o1] = run_both(cfg, syn.t0, syn.t1);
  OracleOutcome oracle = plaintext_oracle(syn.t0, syn.t1, cfg, o0.salt);
  CHECK(o0.c == oracle.c);
  CHECK(o1.c == oracle.c);
  CHECK(o0.c == 48);  // overlap 0.4 of 120, unique entities
  CHECK(o0.insecure_dealer);
  CHECK(o0.salt == derived_salt(cfg.seed, cfg.seed));
}

TEST_CASE("protocol equals oracle: approximate with typos and missing, linear model") {
  GenSpec spec;
  spec.n = 150;
  spec.overlap = 0.5;
  spec.typo_rate = 1.0;
  spec.missing_rate = 0.1;
  spec.seed = 32;
  Synthetic syn = gen_synthetic(spec);

  RunConfig cfg = RunConfig::parse(
      "schema.mode = aware\n"
      "derived.count = 2\n"
      "derived.0.sources = given_name+family_name\n"
      "derived.0.match = approx\n"
      "derived.1.sources = street+city\n"
      "derived.1.match = approx\n"
      "lsh.bands = 8\nlsh.rows = 4\nlsh.q = 2\n"
      "score.model = linear\n"
      "score.we.0 = 2.0\nscore.wn.0 = 0.0\nscore.wm.0 = 0.75\n"
      "score.we.1 = 1.0\nscore.wn.1 = -0.5\nscore.wm.1 = 0.25\n"
      "score.threshold = 1.6\n"
      "ot.mode = dealer\n"
      "seed = 33\n");
  auto [o0, o1] = run_both(cfg, syn.t0, syn.t1);
  OracleOutcome oracle = plaintext_oracle(syn.t0, syn.t1, cfg, o0.salt);
  CHECK(o0.c == oracle.c);
  CHECK(o1.c == oracle.c);
}

TEST_CASE("protocol equals oracle: mixed exact/approximate schema") {
  GenSpec spec;
  spec.n = 130;
  spec.overlap = 0.5;
  spec.typo_rate = 0.6;
  spec.missing_rate = 0.08;
  spec.seed = 34;
  Synthetic syn = gen_synthetic(spec);
  RunConfig cfg = RunConfig::parse(
      "schema.mode = aware\n"
      "derived.count = 2\n"
      "derived.0.sources = given_name+family_name\n"
      "derived.0.match = approx\n"
      "derived.1.sources = street+city\n"
      "derived.1.match = exact\n"
      "score.model = all-match\n"
      "ot.mode = dealer\nseed = 70\n");
  auto [o0, o1] = run_both(cfg, syn.t0, syn.t1);
  OracleOutcome oracle = plaintext_oracle(syn.t0, syn.t1, cfg, o0.salt);
  CHECK(o0.c == oracle.c);
  CHECK(o1.c == oracle.c);
}

TEST_CASE("public-weight mode skips weight sharing and stays correct") {
  GenSpec spec;
  spec.n = 80;
  spec.overlap = 0.5;
  spec.seed = 38;
  Synthetic syn = gen_synthetic(spec);
  RunConfig cfg = RunConfig::parse(
      "schema.mode = aware\n"
      "derived.count = 2\n"
      "derived.0.sources = given_name+family_name\n"
      "derived.0.match = exact\n"
      "derived.1.sources = street+city\n"
      "derived.1.match = exact\n"
      "score.model = linear\n"
      "score.we.0 = 1.0\nscore.we.1 = 1.0\n"
      "score.threshold = 1.5\n"
      "score.weights_public = 1\n"
      "ot.mode = dealer\nseed = 39\n");
  auto [o0, o1] = run_both(cfg, syn.t0, syn.t1);
  OracleOutcome oracle = plaintext_oracle(syn.t0, syn.t1, cfg, o0.salt);
  CHECK(o0.c == oracle.c);
  CHECK(o0.c == 40);

  // public weights are negotiated: a mismatch aborts the handshake
  RunConfig other = cfg;
  other.weights.threshold = 1.0;
  other.role = 1;
  RunConfig mine = cfg;
  mine.role = 0;
  std::atomic<size_t> failures{0};
  run_pair(
      [&](Channel& ch) {
        try {
          run_screening(mine, syn.t0, ch);
        } catch (const std::exception&) {
          failures++;
        }
      },
      [&](Channel& ch) {
        try {
          run_screening(other, syn.t1, ch);
        } catch (const std::exception&) {
          failures++;
        }
      });
  CHECK(failures == 2);
}

TEST_CASE("parallel screening matches sequential results") {
  const size_t n = 60;
  std::vector<Synthetic> cands;
  for (int i = 0; i < 4; ++i) {
    GenSpec spec;
    spec.n = n;
    spec.overlap = 0.25 * i;
    spec.seed = 71;
    cands.push_back(gen_synthetic(spec));
  }
  RecordTable requester = cands[0].t0;
  RunConfig cfg = base_config();
  cfg.screen_threshold = 20;
  cfg.role = 0;
  cfg.screen_parallel = 4;

  std::vector<std::thread> servers;
  std::vector<std::pair<std::string, ChannelFactory>> factories;
  std::vector<std::unique_ptr<Channel>> server_ends;
  for (int i = 0; i < 4; ++i) {
    auto [c0, c1] = make_inmem_pair();
    server_ends.push_back(std::move(c1));
    Channel* sch = server_ends.back().get();
    RecordTable t1 = cands[i].t1;
    RunConfig scfg = cfg;
    servers.emplace_back([scfg, sch, t1] { screen_serve(scfg, t1, *sch); });
    auto holder = std::make_shared<std::unique_ptr<Channel>>(std::move(c0));
    factories.emplace_back("cand" + std::to_string(i), [holder]() { return std::move(*holder); });
  }
  ScreeningReport rep = screen_then_link(cfg, requester, factories);
  for (auto& s : servers) s.join();
  REQUIRE(rep.candidates.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(!rep.candidates[i].errored);
    CHECK(rep.candidates[i].c == u64(15 * i));
    CHECK(rep.candidates[i].passed == (u64(15 * i) > 20));
  }
}

TEST_CASE("reveal discipline and opt-in decisions") {
  GenSpec spec;
  spec.n = 60;
  spec.overlap = 0.5;
  spec.seed = 35;
  Synthetic syn = gen_synthetic(spec);

  RunConfig cfg = base_config();
  auto [o0, o1] = run_both(cfg, syn.t0, syn.t1);
  CHECK(o0.reveal_calls == 1);
  CHECK(o0.revealed_values == 1);  // c is the only revealed value
  CHECK(!o0.decisions.has_value());

  RunConfig on = cfg;
  on.reveal_decisions = true;
  auto [d0, d1] = run_both(on, syn.t0, syn.t1);
  REQUIRE(d0.decisions.has_value());
  REQUIRE(d1.decisions.has_value());
  OracleOutcome oracle = plaintext_oracle(syn.t0, syn.t1, cfg, d0.salt);
  CHECK(*d0.decisions == oracle.decisions);
  CHECK(d0.decisions->popcount() == d0.c);

  // one-sided opt-in stays off
  RunConfig half0 = cfg, half1 = cfg;
  half0.reveal_decisions = true;
  half0.role = 0;
  half1.role = 1;
  ScreeningOutcome h0, h1;
  run_pair([&](Channel& ch) { h0 = run_screening(half0, syn.t0, ch); },
           [&](Channel& ch) { h1 = run_screening(half1, syn.t1, ch); });
  CHECK(!h0.decisions.has_value());
}

TEST_CASE("handshake rejects mismatched schemas") {
  GenSpec spec;
  spec.n = 20;
  spec.seed = 36;
  Synthetic syn = gen_synthetic(spec);
  RunConfig cfg0 = base_config();
  RunConfig cfg1 = base_config();
  cfg1.derived_approx[0] = true;  // divergent negotiated parameter
  cfg0.role = 0;
  cfg1.role = 1;
  std::atomic<size_t> failures{0};
  run_pair(
      [&](Channel& ch) {
        try {
          run_screening(cfg0, syn.t0, ch);
        } catch (const std::exception&) {
          failures++;
        }
      },
      [&](Channel& ch) {
        try {
          run_screening(cfg1, syn.t1, ch);
        } catch (const std::exception&) {
          failures++;
        }
      });
  CHECK(failures == 2);
}

TEST_CASE("protocol with extended OT matches dealer-mode result") {
  GenSpec spec;
  spec.n = 40;
  spec.overlap = 0.5;
  spec.seed = 37;
  Synthetic syn = gen_synthetic(spec);
  RunConfig cfg = base_config();
  auto [dealer0, dealer1] = run_both(cfg, syn.t0, syn.t1);
  cfg.ot_mode = OtMode::extended;
  auto [ext0, ext1] = run_both(cfg, syn.t0, syn.t1);
  CHECK(ext0.c == dealer0.c);
  CHECK(!ext0.insecure_dealer);
  CHECK(ext1.c == dealer1.c);
}

TEST_CASE("screening then linkage over five candidates") {
  // overlaps 10,30,50,70,90 of n=100; strict threshold 60 passes exactly two
  const size_t n = 100;
  std::vector<Synthetic> cands;
  for (int i = 0; i < 5; ++i) {
    GenSpec spec;
    spec.n = n;
    spec.overlap = 0.1 + 0.2 * i;
    spec.seed = 50;  // same requester table in every pair
    cands.push_back(gen_synthetic(spec));
  }
  RecordTable requester = cands[0].t0;

  RunConfig cfg = base_config();
  cfg.screen_threshold = 60;
  cfg.role = 0;

  std::vector<std::thread> servers;
  std::vector<std::pair<std::string, ChannelFactory>> factories;
  std::vector<std::unique_ptr<Channel>> server_ends;
  for (int i = 0; i < 5; ++i) {
    auto [c0, c1] = make_inmem_pair();
    server_ends.push_back(std::move(c1));
    Channel* sch = server_ends.back().get();
    RecordTable t1 = cands[i].t1;
    servers.emplace_back([&, sch, t1] { screen_serve(cfg, t1, *sch); });
    auto holder = std::make_shared<std::unique_ptr<Channel>>(std::move(c0));
    factories.emplace_back("cand" + std::to_string(i),
                           [holder]() { return std::move(*holder); });
  }
  ScreeningReport rep = screen_then_link(cfg, requester, factories);
  for (auto& s : servers) s.join();

  REQUIRE(rep.candidates.size() == 5);
  size_t invoked = 0;
  for (int i = 0; i < 5; ++i) {
    CHECK(!rep.candidates[i].errored);
    CHECK(rep.candidates[i].c == u64(10 + 20 * i));
    bool should_pass = rep.candidates[i].c > 60;
    CHECK(rep.candidates[i].passed == should_pass);
    CHECK(rep.candidates[i].pprl_invoked == should_pass);
    invoked += rep.candidates[i].pprl_invoked;
    if (rep.candidates[i].pprl_invoked)
      CHECK(rep.candidates[i].linked_records == rep.candidates[i].c);
  }
  CHECK(invoked == 2);
  CHECK(rep.alpha == doctest::Approx(0.4));
  REQUIRE(rep.gamma_valid);
  CHECK(rep.gamma == doctest::Approx(rep.t_pprs / rep.t_pprl + rep.alpha).epsilon(1e-12));

  std::stringstream ss;
  write_report(ss, rep);
  CHECK(ss.str().find("alpha = 0.4") != std::string::npos);
  CHECK(ss.str().find("pprl_stub_nonprivate = 1") != std::string::npos);
}

TEST_CASE("candidate isolation: one failure does not abort the loop") {
  GenSpec spec;
  spec.n = 30;
  spec.overlap = 1.0;
  spec.seed = 60;
  Synthetic syn = gen_synthetic(spec);
  RunConfig cfg = base_config();
  cfg.role = 0;
  cfg.screen_threshold = 0;

  // candidate 0 dies mid-handshake; candidate 1 works
  auto [a0, a1] = make_inmem_pair();
  auto [b0, b1] = make_inmem_pair();
  std::thread dead([&] { a1.reset(); });
  RecordTable t1 = syn.t1;
  RunConfig scfg = cfg;
  std::thread good([&, t1] { screen_serve(scfg, t1, *b1); });

  std::vector<std::pair<std::string, ChannelFactory>> factories;
  auto ha = std::make_shared<std::unique_ptr<Channel>>(std::move(a0));
  auto hb = std::make_shared<std::unique_ptr<Channel>>(std::move(b0));
  factories.emplace_back("dead", [ha]() { return std::move(*ha); });
  factories.emplace_back("good", [hb]() { return std::move(*hb); });
  ScreeningReport rep = screen_then_link(cfg, syn.t0, factories);
  dead.join();
  good.join();

  REQUIRE(rep.candidates.size() == 2);
  CHECK(rep.candidates[0].errored);
  CHECK(!rep.candidates[1].errored);
  CHECK(rep.candidates[1].c == 30);
}

TEST_CASE("bench rows carry formula-consistent counts") {
  OfaBenchRow ofa = bench_alignment(100, 27, OfaOptions{}, 3);
  OfaBenchRow oep = bench_alignment(100, 27, oep_baseline(), 3);
  CHECK(ofa.variant == "ofa");
  CHECK(oep.variant == "oep");
  CHECK(ofa.ots == ofa.switches);
  CHECK(oep.ots == oep.switches);
  CHECK(ofa.bytes < oep.bytes);
}
