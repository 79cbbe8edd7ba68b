#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "pprs/engine/engine.hpp"

using namespace pprs;

namespace {

RecordTable load_table(const std::string& path) { return load_csv(path); }

int cmd_gen(const std::string& out0, const std::string& out1, const std::string& truth_path,
            const GenSpec& spec) {
  Synthetic syn = gen_synthetic(spec);
  save_csv(syn.t0, out0);
  save_csv(syn.t1, out1);
  if (!truth_path.empty()) {
    std::ofstream tf(truth_path);
    tf << "row0,row1\n";
    for (auto [i, j] : syn.links) tf << i << "," << j << "\n";
  }
  std::cout << "wrote " << syn.t0.rows << " records per table, " << syn.links.size()
            << " ground-truth links, " << syn.dup_count0 << " duplicates per table\n";
  return 0;
}

int cmd_oracle(const std::string& cfg_path, const std::string& t0_path, const std::string& t1_path,
               u64 seed0, u64 seed1, const std::string& report_path) {
  RunConfig cfg = cfg_path.empty() ? RunConfig{} : RunConfig::load(cfg_path);
  RecordTable t0 = load_table(t0_path), t1 = load_table(t1_path);
  auto salt = derived_salt(seed0, seed1);
  OracleOutcome o = plaintext_oracle(t0, t1, cfg, salt);
  std::ostream* os = &std::cout;
  std::ofstream f;
  if (!report_path.empty()) {
    f.open(report_path);
    os = &f;
  }
  *os << "c = " << o.c << "\n";
  return 0;
}

int cmd_screen(RunConfig cfg, const std::string& table_path, u16 listen_port,
               const std::vector<std::string>& connect, const std::string& report_path,
               bool loopback, const std::string& table1_path) {
  RecordTable table = load_table(table_path);

  if (loopback) {
    // demo: both roles in-process over an in-memory channel
    RecordTable t1 = load_table(table1_path.empty() ? table_path : table1_path);
    RunConfig c1 = cfg;
    c1.role = 1;
    auto [ch0, ch1] = make_inmem_pair();
    ScreeningOutcome out0;
    std::thread cand([&] { screen_serve(c1, t1, *ch1); });
    std::vector<std::pair<std::string, ChannelFactory>> cands;
    Channel* raw = ch0.get();
    std::unique_ptr<Channel>* holder = &ch0;
    cands.emplace_back("loopback", [raw, holder]() {
      (void)raw;
      return std::move(*holder);
    });
    cfg.role = 0;
    ScreeningReport rep = screen_then_link(cfg, table, cands);
    cand.join();
    std::ostream* os = &std::cout;
    std::ofstream f;
    if (!report_path.empty()) {
      f.open(report_path);
      os = &f;
    }
    write_report(*os, rep);
    return 0;
  }

  if (cfg.role == 1) {
    auto ch = tcp_listen(listen_port);
    screen_serve(cfg, table, *ch);
    std::cout << "candidate session complete\n";
    return 0;
  }

  std::vector<std::pair<std::string, ChannelFactory>> cands;
  for (const auto& ep : connect) {
    auto colon = ep.rfind(':');
    if (colon == std::string::npos) throw std::runtime_error("--connect expects host:port");
    std::string host = ep.substr(0, colon);
    u16 port = u16(std::stoul(ep.substr(colon + 1)));
    cands.emplace_back(ep, [host, port]() { return tcp_connect(host, port); });
  }
  ScreeningReport rep = screen_then_link(cfg, table, cands);
  std::ostream* os = &std::cout;
  std::ofstream f;
  if (!report_path.empty()) {
    f.open(report_path);
    os = &f;
  }
  write_report(*os, rep);
  return 0;
}

int cmd_bench(const std::vector<size_t>& sizes, const std::string& variants, u64 seed,
              const std::string& out_path) {
  std::ostream* os = &std::cout;
  std::ofstream f;
  if (!out_path.empty()) {
    f.open(out_path);
    os = &f;
  }
  *os << "n,eps_percent,variant,switches,ots,bytes,seconds\n";
  for (size_t n : sizes) {
    for (const auto& [name, opt] : bench_variants()) {
      if (variants != "all" && variants.find(name) == std::string::npos) continue;
      OfaBenchRow row = bench_alignment(n, 27, opt, seed);
      *os << row.n << "," << row.eps_percent << "," << row.variant << "," << row.switches << ","
          << row.ots << "," << row.bytes << "," << row.seconds << "\n";
      os->flush();
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-party private record screening toolkit"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic table pair with ground truth");
  GenSpec spec;
  std::string out0 = "table0.csv", out1 = "table1.csv", truth;
  gen->add_option("--n", spec.n, "records per table");
  gen->add_option("--typo-rate", spec.typo_rate, "chance an overlap record gets 1-2 typos");
  gen->add_option("--dup-rate", spec.dup_rate, "fraction of duplicate rows");
  gen->add_option("--missing-rate", spec.missing_rate, "per-cell missing chance");
  gen->add_option("--overlap", spec.overlap, "fraction of shared entities");
  gen->add_option("--seed", spec.seed, "generator seed");
  gen->add_option("--out0", out0, "requester CSV path");
  gen->add_option("--out1", out1, "candidate CSV path");
  gen->add_option("--truth", truth, "ground-truth links CSV path");

  // oracle
  auto* oracle = app.add_subcommand("oracle", "run the plaintext pipeline on two CSVs");
  std::string ocfg, ot0, ot1, oreport;
  u64 oseed0 = 1, oseed1 = 1;
  oracle->add_option("--config", ocfg, "run configuration");
  oracle->add_option("--table0", ot0, "requester CSV")->required();
  oracle->add_option("--table1", ot1, "candidate CSV")->required();
  oracle->add_option("--seed0", oseed0, "requester seed (for the session salt)");
  oracle->add_option("--seed1", oseed1, "candidate seed");
  oracle->add_option("--report", oreport, "write result here instead of stdout");

  // screen
  auto* screen = app.add_subcommand("screen", "run the screening protocol");
  std::string scfg, stable, srole = "requester", sreport, stable1;
  u16 sport = 7766;
  std::vector<std::string> sconnect;
  u64 sseed = 0;
  bool sloopback = false;
  screen->add_option("--role", srole, "requester or candidate");
  screen->add_option("--config", scfg, "run configuration")->required();
  screen->add_option("--table", stable, "this party's CSV")->required();
  screen->add_option("--listen", sport, "candidate: listen port");
  screen->add_option("--connect", sconnect, "requester: candidate host:port (repeatable)");
  screen->add_option("--seed", sseed, "override config seed");
  screen->add_option("--report", sreport, "report path");
  screen->add_flag("--loopback", sloopback, "run both roles in-process (demo)");
  screen->add_option("--table1", stable1, "loopback: candidate CSV");

  // bench-ofa
  auto* bench = app.add_subcommand("bench-ofa", "alignment benchmark across variants/sizes");
  std::vector<size_t> bsizes = {1000, 10000};
  std::string bvariants = "all", bout;
  u64 bseed = 7;
  bench->add_option("--sizes", bsizes, "record counts");
  bench->add_option("--variants", bvariants, "all or comma list: oep,opt1,opt1+2,ofa");
  bench->add_option("--seed", bseed, "instance seed");
  bench->add_option("--out", bout, "CSV output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_gen(out0, out1, truth, spec);
    if (*oracle) return cmd_oracle(ocfg, ot0, ot1, oseed0, oseed1, oreport);
    if (*screen) {
      RunConfig cfg = RunConfig::load(scfg);
      if (srole == "requester")
        cfg.role = 0;
      else if (srole == "candidate")
        cfg.role = 1;
      else
        throw std::runtime_error("--role must be requester or candidate");
      if (sseed) cfg.seed = sseed;
      return cmd_screen(cfg, stable, sport, sconnect, sreport, sloopback, stable1);
    }
    if (*bench) return cmd_bench(bsizes, bvariants, bseed, bout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
