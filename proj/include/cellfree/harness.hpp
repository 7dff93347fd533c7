#ifndef CELLFREE_HARNESS_HPP
#define CELLFREE_HARNESS_HPP

#include <armadillo>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cellfree/pipeline.hpp"
#include "cellfree/scenario.hpp"

namespace cellfree {

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

// Reads a JSON config whose keys mirror the SystemConfig fields; powers are
// given in dBm ("p_max_dbm", "noise_dbm"). Missing keys keep defaults.
// Throws std::invalid_argument with position diagnostics on malformed input.
SystemConfig config_from_json_text(const std::string& text);
SystemConfig load_config(const std::string& path);

// Default desk-scale configuration (B=4, R=2, K=4, N_t=2, N=16, L=B+2,
// P=30 dBm, noise -80 dBm). paper_scale switches N to 50.
SystemConfig default_config(bool paper_scale = false);

enum class SweepVar { P_dBm, N, K, B };

SweepVar sweep_var_from_string(const std::string& s);
std::string to_string(SweepVar v);

struct ExperimentSpec {
  SweepVar var = SweepVar::P_dBm;
  std::vector<double> values;
  arma::uword seeds_per_point = 1;
  std::uint64_t base_seed = 1;
  std::vector<std::string> algorithms;  // see kAlgorithmNames
  std::string output_path;              // empty: caller handles output
  bool timings = false;                 // wall-clock column off by default
};

struct ResultRow {
  std::string algorithm;
  std::string sweep_var;
  double sweep_value = 0.0;
  std::uint64_t seed = 0;
  double wsr_bits = 0.0;
  double consensus_err = 0.0;
  std::uint64_t msg_complex_scalars = 0;
  double runtime_ms = 0.0;
};

extern const std::vector<std::string> kAlgorithmNames;

// Applies one sweep value to a base config (resizing per-BS/per-UE fields and
// re-deriving L = B + 2 when B is swept).
SystemConfig apply_sweep_value(const SystemConfig& base, SweepVar var,
                               double value);

// Runs one algorithm on one seeded draw and reports the row fields.
ResultRow run_single(const SystemConfig& cfg, const std::string& algorithm);

// Full sweep: every (value, seed, algorithm) combination, rows sorted by
// (algorithm, value, seed) so worker scheduling never changes the output.
// Thread pool size is capped by the CELLFREE_THREADS environment variable.
std::vector<ResultRow> run_experiment(const ExperimentSpec& spec,
                                      const SystemConfig& base_config);

// Fixed schema: algorithm,sweep_var,sweep_value,seed,wsr_bits,consensus_err,
// msg_complex_scalars,runtime_ms. With timings off the runtime column is
// written as 0 so replays are byte-identical.
void write_csv(const std::vector<ResultRow>& rows, std::ostream& out,
               bool timings = false);

// Per-block WSR / consensus trace of one run.
void write_block_trace(const RunResult& result, std::ostream& out);

// One line per ring message for overhead audits.
void write_msg_trace(const std::vector<MsgRecord>& messages, std::ostream& out);

}  // namespace cellfree

#endif  // CELLFREE_HARNESS_HPP
