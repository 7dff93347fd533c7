#include "cellfree/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "cellfree/baselines.hpp"
#include "cellfree/channel.hpp"
#include "cellfree/pipeline.hpp"

namespace cellfree {

using nlohmann::json;

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watts_to_dbm(double watts) {
  if (watts <= 0.0)
    throw std::invalid_argument("watts_to_dbm: power must be positive");
  return 10.0 * std::log10(watts) + 30.0;
}

const std::vector<std::string> kAlgorithmNames = {
    "distributed", "centralized", "local_zf_maxao", "mrt_maxao", "mrt_random"};

SystemConfig default_config(bool paper_scale) {
  SystemConfig cfg;
  cfg.B = 4;
  cfg.R = 2;
  cfg.K = 4;
  cfg.N = paper_scale ? 50 : 16;
  cfg.N_t = 2;
  cfg.L = 6;
  cfg.p_max = arma::vec(cfg.B, arma::fill::value(dbm_to_watts(30.0)));
  cfg.noise_power = dbm_to_watts(-80.0);
  cfg.validate_and_finalize();
  return cfg;
}

namespace {

arma::vec vec_from_json(const json& j, const char* key) {
  if (j.at(key).is_number()) return arma::vec{j.at(key).get<double>()};
  const auto v = j.at(key).get<std::vector<double>>();
  return arma::vec(v);
}

void pathloss_from_json(const json& j, PathLossParams& p) {
  if (j.contains("alpha")) p.alpha = j.at("alpha").get<double>();
  if (j.contains("d0_m")) p.d0 = j.at("d0_m").get<double>();
  if (j.contains("g0_db"))
    p.g0 = std::pow(10.0, j.at("g0_db").get<double>() / 10.0);
}

}  // namespace

SystemConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config parse error: ") + e.what());
  }
  SystemConfig cfg = default_config();
  try {
    if (j.contains("B")) cfg.B = j.at("B").get<arma::uword>();
    if (j.contains("R")) cfg.R = j.at("R").get<arma::uword>();
    if (j.contains("K")) cfg.K = j.at("K").get<arma::uword>();
    if (j.contains("N")) cfg.N = j.at("N").get<arma::uword>();
    if (j.contains("N_t")) cfg.N_t = j.at("N_t").get<arma::uword>();
    cfg.L = j.contains("L") ? j.at("L").get<arma::uword>() : 0;  // 0: auto B+2
    if (j.contains("p_max_dbm")) {
      arma::vec dbm = vec_from_json(j, "p_max_dbm");
      cfg.p_max = dbm;
      cfg.p_max.transform([](double d) { return dbm_to_watts(d); });
    } else {
      cfg.p_max.reset();
    }
    if (j.contains("noise_dbm"))
      cfg.noise_power = dbm_to_watts(j.at("noise_dbm").get<double>());
    if (j.contains("weights")) cfg.weights = vec_from_json(j, "weights");
    else cfg.weights.reset();
    if (j.contains("rho")) cfg.rho = vec_from_json(j, "rho");
    else cfg.rho.reset();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("paths_per_channel"))
      cfg.paths_per_channel = j.at("paths_per_channel").get<arma::uword>();
    if (j.contains("w_damping")) cfg.w_damping = j.at("w_damping").get<double>();
    if (j.contains("bcd_max_sweeps"))
      cfg.bcd_max_sweeps = j.at("bcd_max_sweeps").get<arma::uword>();
    if (j.contains("bcd_tol")) cfg.bcd_tol = j.at("bcd_tol").get<double>();
    if (j.contains("centralized_max_iters"))
      cfg.centralized_max_iters =
          j.at("centralized_max_iters").get<arma::uword>();
    if (j.contains("centralized_tol"))
      cfg.centralized_tol = j.at("centralized_tol").get<double>();
    if (j.contains("tune_batch"))
      cfg.tune_batch = j.at("tune_batch").get<arma::uword>();
    if (j.contains("pathloss")) {
      const json& pj = j.at("pathloss");
      if (pj.contains("bs_ris")) pathloss_from_json(pj.at("bs_ris"), cfg.pathloss.bs_ris);
      if (pj.contains("ris_ue")) pathloss_from_json(pj.at("ris_ue"), cfg.pathloss.ris_ue);
      if (pj.contains("bs_ue")) pathloss_from_json(pj.at("bs_ue"), cfg.pathloss.bs_ue);
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config field error: ") + e.what());
  }
  cfg.validate_and_finalize();
  return cfg;
}

SystemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json_text(ss.str());
}

SweepVar sweep_var_from_string(const std::string& s) {
  if (s == "P_dBm" || s == "p_dbm" || s == "P") return SweepVar::P_dBm;
  if (s == "N") return SweepVar::N;
  if (s == "K") return SweepVar::K;
  if (s == "B") return SweepVar::B;
  throw std::invalid_argument("unknown sweep variable: " + s);
}

std::string to_string(SweepVar v) {
  switch (v) {
    case SweepVar::P_dBm: return "P_dBm";
    case SweepVar::N: return "N";
    case SweepVar::K: return "K";
    default: return "B";
  }
}

SystemConfig apply_sweep_value(const SystemConfig& base, SweepVar var,
                               double value) {
  SystemConfig cfg = base;
  switch (var) {
    case SweepVar::P_dBm:
      cfg.p_max = arma::vec(cfg.B, arma::fill::value(dbm_to_watts(value)));
      break;
    case SweepVar::N:
      cfg.N = static_cast<arma::uword>(value);
      break;
    case SweepVar::K:
      cfg.K = static_cast<arma::uword>(value);
      cfg.weights.reset();  // re-derive all-ones of the new size
      break;
    case SweepVar::B: {
      const double p = cfg.p_max.n_elem > 0 ? cfg.p_max[0] : 1.0;
      const double r = cfg.rho.n_elem > 0 ? cfg.rho[0] : 1.0;
      cfg.B = static_cast<arma::uword>(value);
      cfg.L = cfg.B + 2;
      cfg.p_max = arma::vec(cfg.B, arma::fill::value(p));
      cfg.rho = arma::vec(cfg.B, arma::fill::value(r));
      break;
    }
  }
  cfg.validate_and_finalize();
  return cfg;
}

ResultRow run_single(const SystemConfig& config, const std::string& algorithm) {
  SystemConfig cfg = config;
  cfg.validate_and_finalize();
  const Scenario sc = build_scenario(cfg);
  const ChannelSet ch = make_channels(cfg, sc);

  ResultRow row;
  row.algorithm = algorithm;
  row.seed = cfg.seed;

  const auto t0 = std::chrono::steady_clock::now();
  if (algorithm == "distributed") {
    const RunResult r = run_distributed(cfg, ch);
    row.wsr_bits = r.final_wsr;
    row.consensus_err = r.final_consensus;
    row.msg_complex_scalars = r.message_scalars;
  } else {
    BaselineOutput out;
    if (algorithm == "centralized") out = centralized_fp(ch, cfg);
    else if (algorithm == "local_zf_maxao") out = local_zf_maxao(ch, cfg);
    else if (algorithm == "mrt_maxao") out = mrt_maxao(ch, cfg);
    else if (algorithm == "mrt_random") out = mrt_random(ch, cfg);
    else throw std::invalid_argument("unknown algorithm: " + algorithm);
    row.wsr_bits = wsr(ch, out.W, out.theta, cfg.weights, cfg.noise_power);
    row.consensus_err = 0.0;
    row.msg_complex_scalars = 0;
  }
  row.runtime_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  return row;
}

namespace {

unsigned pool_size(std::size_t jobs) {
  unsigned n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  if (const char* env = std::getenv("CELLFREE_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) n = static_cast<unsigned>(v);
  }
  return static_cast<unsigned>(std::min<std::size_t>(n, jobs));
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec,
                                      const SystemConfig& base_config) {
  if (spec.values.empty())
    throw std::invalid_argument("run_experiment: empty value list");
  if (spec.seeds_per_point == 0)
    throw std::invalid_argument("run_experiment: seeds_per_point must be >= 1");
  if (spec.algorithms.empty())
    throw std::invalid_argument("run_experiment: empty algorithm list");
  for (const auto& a : spec.algorithms) {
    if (std::find(kAlgorithmNames.begin(), kAlgorithmNames.end(), a) ==
        kAlgorithmNames.end())
      throw std::invalid_argument("unknown algorithm: " + a);
  }

  struct Job {
    std::string algorithm;
    double value;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const auto& alg : spec.algorithms)
    for (const double v : spec.values)
      for (arma::uword s = 0; s < spec.seeds_per_point; ++s)
        jobs.push_back({alg, v, spec.base_seed + s});

  std::vector<ResultRow> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;

  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        SystemConfig cfg = apply_sweep_value(base_config, spec.var, jobs[i].value);
        cfg.seed = jobs[i].seed;
        ResultRow row = run_single(cfg, jobs[i].algorithm);
        row.sweep_var = to_string(spec.var);
        row.sweep_value = jobs[i].value;
        rows[i] = std::move(row);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        next.store(jobs.size());
        return;
      }
    }
  };

  const unsigned workers = pool_size(jobs.size());
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  // Jobs are generated in (algorithm, value, seed) order already; the sort
  // pins the contract independent of generation order.
  std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    if (a.algorithm != b.algorithm) return a.algorithm < b.algorithm;
    if (a.sweep_value != b.sweep_value) return a.sweep_value < b.sweep_value;
    return a.seed < b.seed;
  });
  return rows;
}

void write_csv(const std::vector<ResultRow>& rows, std::ostream& out,
               bool timings) {
  out << "algorithm,sweep_var,sweep_value,seed,wsr_bits,consensus_err,"
         "msg_complex_scalars,runtime_ms\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%.12g,%llu,%.12g,%.12g,%llu,%.3f\n",
                  r.algorithm.c_str(), r.sweep_var.c_str(), r.sweep_value,
                  static_cast<unsigned long long>(r.seed), r.wsr_bits,
                  r.consensus_err,
                  static_cast<unsigned long long>(r.msg_complex_scalars),
                  timings ? r.runtime_ms : 0.0);
    out << buf;
  }
}

void write_block_trace(const RunResult& result, std::ostream& out) {
  out << "block,wsr_bits,consensus_err\n";
  char buf[128];
  for (arma::uword l = 0; l < result.wsr_trace.n_elem; ++l) {
    std::snprintf(buf, sizeof(buf), "%llu,%.12g,%.12g\n",
                  static_cast<unsigned long long>(l + 1), result.wsr_trace[l],
                  result.consensus_trace[l]);
    out << buf;
  }
}

void write_msg_trace(const std::vector<MsgRecord>& messages, std::ostream& out) {
  out << "block,sender,receiver,scalar_count\n";
  char buf[128];
  for (const auto& m : messages) {
    std::snprintf(buf, sizeof(buf), "%llu,%llu,%llu,%llu\n",
                  static_cast<unsigned long long>(m.block),
                  static_cast<unsigned long long>(m.sender),
                  static_cast<unsigned long long>(m.receiver),
                  static_cast<unsigned long long>(m.scalars));
    out << buf;
  }
}

}  // namespace cellfree
