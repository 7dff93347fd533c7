// Command-line front end: single runs, experiment sweeps, penalty tuning and
// the quick verification suite.
#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "cellfree/baselines.hpp"
#include "cellfree/channel.hpp"
#include "cellfree/harness.hpp"
#include "cellfree/pipeline.hpp"
#include "cellfree/selfcheck.hpp"

namespace {

using namespace cellfree;

struct CommonOpts {
  std::string config_path;
  bool paper_scale = false;
  // Flag overrides; CLI11 count() tells us which were set.
  std::uint64_t seed = 1;
  std::uint64_t B = 4, R = 2, K = 4, N = 16, N_t = 2, L = 0;
  double p_dbm = 30.0, noise_dbm = -80.0, rho = 1.0;
};

void add_common(CLI::App* app, CommonOpts& o) {
  app->add_option("--config", o.config_path, "JSON config file");
  app->add_flag("--paper-scale", o.paper_scale, "use N=50 RIS elements");
  app->add_option("--seed", o.seed, "run seed");
  app->add_option("--B", o.B, "number of BSs");
  app->add_option("--R", o.R, "number of RISs");
  app->add_option("--K", o.K, "number of UEs");
  app->add_option("--N", o.N, "elements per RIS");
  app->add_option("--Nt", o.N_t, "antennas per BS");
  app->add_option("--L", o.L, "number of blocks (default B+2)");
  app->add_option("--p-dbm", o.p_dbm, "per-BS power budget [dBm]");
  app->add_option("--noise-dbm", o.noise_dbm, "noise power [dBm]");
  app->add_option("--rho", o.rho, "consensus penalty (all BSs)");
}

SystemConfig build_config(const CLI::App* app, const CommonOpts& o) {
  SystemConfig cfg = o.config_path.empty() ? default_config(o.paper_scale)
                                           : load_config(o.config_path);
  if (o.paper_scale && app->count("--N") == 0) cfg.N = 50;
  auto set = [&](const char* flag) { return app->count(flag) > 0; };
  if (set("--seed")) cfg.seed = o.seed;
  if (set("--B")) {
    cfg.B = o.B;
    cfg.p_max.reset();
    cfg.rho.reset();
    if (!set("--L")) cfg.L = 0;
  }
  if (set("--R")) cfg.R = o.R;
  if (set("--K")) {
    cfg.K = o.K;
    cfg.weights.reset();
  }
  if (set("--N")) cfg.N = o.N;
  if (set("--Nt")) cfg.N_t = o.N_t;
  if (set("--L")) cfg.L = o.L;
  if (set("--p-dbm") || cfg.p_max.n_elem != cfg.B)
    cfg.p_max = arma::vec(cfg.B, arma::fill::value(dbm_to_watts(o.p_dbm)));
  if (set("--noise-dbm")) cfg.noise_power = dbm_to_watts(o.noise_dbm);
  if (set("--rho") || cfg.rho.n_elem != cfg.B)
    cfg.rho = arma::vec(cfg.B, arma::fill::value(o.rho));
  cfg.validate_and_finalize();
  return cfg;
}

std::vector<std::string> parse_algos(const std::string& s) {
  if (s == "all") return kAlgorithmNames;
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t comma = s.find(',', pos);
    const std::string tok = s.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!tok.empty()) out.push_back(tok);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

int cmd_run(const SystemConfig& cfg, const std::string& algo,
            const std::string& trace_out, const std::string& msg_trace,
            const std::string& dump_channels) {
  const Scenario sc = build_scenario(cfg);
  const ChannelSet ch = make_channels(cfg, sc);

  if (!dump_channels.empty()) {
    std::ofstream f(dump_channels);
    if (!f) throw std::runtime_error("cannot write " + dump_channels);
    dump_channels_csv(ch, f);
  }

  char buf[256];
  if (algo == "distributed") {
    const RunResult r = run_distributed(cfg, ch);
    std::snprintf(buf, sizeof(buf),
                  "algorithm: distributed\nseed: %llu\nwsr_bits: %.12g\n"
                  "consensus_err: %.12g\nmsg_complex_scalars: %llu\n",
                  static_cast<unsigned long long>(cfg.seed), r.final_wsr,
                  r.final_consensus,
                  static_cast<unsigned long long>(r.message_scalars));
    std::cout << buf;
    std::fprintf(stderr, "wallclock_ms: %.3f\n", r.wallclock_ms);
    if (!trace_out.empty()) {
      std::ofstream f(trace_out);
      if (!f) throw std::runtime_error("cannot write " + trace_out);
      write_block_trace(r, f);
    }
    if (!msg_trace.empty()) {
      std::ofstream f(msg_trace);
      if (!f) throw std::runtime_error("cannot write " + msg_trace);
      write_msg_trace(r.messages, f);
    }
  } else {
    const ResultRow row = run_single(cfg, algo);
    std::snprintf(buf, sizeof(buf),
                  "algorithm: %s\nseed: %llu\nwsr_bits: %.12g\n"
                  "consensus_err: %.12g\nmsg_complex_scalars: %llu\n",
                  algo.c_str(), static_cast<unsigned long long>(cfg.seed),
                  row.wsr_bits, row.consensus_err,
                  static_cast<unsigned long long>(row.msg_complex_scalars));
    std::cout << buf;
    std::fprintf(stderr, "wallclock_ms: %.3f\n", row.runtime_ms);
  }
  return 0;
}

int cmd_verify() {
  std::vector<CheckResult> results;
  results.push_back(check_transform_tightness(30, 1234));
  results.push_back(check_closed_form_optimality(20, 2345));
  results.push_back(check_theta_bcd_vs_grid(10, 3456, 200));
  results.push_back(check_exchange_exactness({2, 3}, 4567));
  results.push_back(check_run_determinism(5678));
  bool ok = true;
  for (const auto& r : results) {
    std::printf("%s %-24s %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                r.detail.c_str());
    ok = ok && r.pass;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  // Keep BLAS single-threaded; the workload is many small problems and the
  // harness parallelizes across runs.
  setenv("OPENBLAS_NUM_THREADS", "1", 0);

  CLI::App app{"RIS-assisted cell-free downlink simulator"};
  app.require_subcommand(1);

  CommonOpts run_o, sweep_o, tune_o;
  std::string run_algo = "distributed";
  std::string trace_out, msg_trace, dump_channels;
  CLI::App* run = app.add_subcommand("run", "run one configuration");
  add_common(run, run_o);
  run->add_option("--algo", run_algo,
                  "distributed|centralized|local_zf_maxao|mrt_maxao|mrt_random");
  run->add_option("--trace-out", trace_out, "per-block trace CSV path");
  run->add_option("--msg-trace", msg_trace, "message trace CSV path");
  run->add_option("--dump-channels", dump_channels, "channel dump CSV path");

  std::string sweep_var = "P_dBm", sweep_algos = "all", sweep_out;
  std::vector<double> sweep_values;
  std::uint64_t sweep_seeds = 1, sweep_base_seed = 1;
  bool timings = false;
  CLI::App* sweep = app.add_subcommand("sweep", "run an experiment sweep");
  add_common(sweep, sweep_o);
  sweep->add_option("--var", sweep_var, "sweep variable: P_dBm|N|K|B");
  sweep->add_option("--values", sweep_values, "sweep values")
      ->delimiter(',')
      ->required();
  sweep->add_option("--seeds", sweep_seeds, "seeds per point");
  sweep->add_option("--base-seed", sweep_base_seed, "first seed value");
  sweep->add_option("--algos", sweep_algos, "comma list or 'all'");
  sweep->add_option("--out", sweep_out, "output CSV path (default stdout)");
  sweep->add_flag("--timings", timings,
                  "record wall-clock (breaks byte-identical replays)");

  std::vector<double> grid{0.01, 0.1, 1.0, 10.0};
  CLI::App* tune = app.add_subcommand("tune-rho", "grid-tune consensus penalties");
  add_common(tune, tune_o);
  tune->add_option("--grid", grid, "candidate values")->delimiter(',');

  CLI::App* verify = app.add_subcommand("verify", "run the quick property suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return cmd_run(build_config(run, run_o), run_algo, trace_out, msg_trace,
                     dump_channels);
    }
    if (sweep->parsed()) {
      const SystemConfig base = build_config(sweep, sweep_o);
      ExperimentSpec spec;
      spec.var = sweep_var_from_string(sweep_var);
      spec.values = sweep_values;
      spec.seeds_per_point = sweep_seeds;
      spec.base_seed = sweep_base_seed;
      spec.algorithms = parse_algos(sweep_algos);
      spec.timings = timings;
      const auto rows = run_experiment(spec, base);
      if (sweep_out.empty()) {
        write_csv(rows, std::cout, timings);
      } else {
        std::ofstream f(sweep_out);
        if (!f) throw std::runtime_error("cannot write " + sweep_out);
        write_csv(rows, f, timings);
      }
      return 0;
    }
    if (tune->parsed()) {
      const SystemConfig cfg = build_config(tune, tune_o);
      const arma::vec rho = tune_rho(cfg, arma::vec(grid));
      for (arma::uword b = 0; b < rho.n_elem; ++b)
        std::printf("rho[%llu]: %.12g\n", static_cast<unsigned long long>(b),
                    rho[b]);
      return 0;
    }
    if (verify->parsed()) return cmd_verify();
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
