#ifndef CELLFREE_PIPELINE_HPP
#define CELLFREE_PIPELINE_HPP

#include <armadillo>
#include <cstdint>
#include <optional>
#include <vector>

#include "cellfree/exchange.hpp"
#include "cellfree/objective.hpp"

namespace cellfree {

enum class BlockKind { Ini, Mid1, Mid2, Mid3, Out };

// Block taxonomy for 1-based block index l of L. l = 1 is Ini and l = L is
// Out (Out wins over Mid2 when L = B); 2..B-1 are Mid1, B is Mid2 and
// B+1..L-1 are Mid3.
BlockKind block_kind(arma::uword l, arma::uword B, arma::uword L);

// Per-BS initial phase vector (an independent seeded draw per BS) and the
// MRT initialization of one BS's precoder on its direct channels, scaled to
// the power budget.
arma::cx_vec initial_theta(const SystemConfig& cfg, arma::uword b);
arma::cx_mat mrt_initial_precoder(const ChannelSet& ch, arma::uword b,
                                  double p_max);

// Element-wise circular mean of the per-BS phase vectors; entries where the
// sum vanishes fall back to the first BS's value.
arma::cx_vec fuse_theta(const std::vector<arma::cx_vec>& thetas);

struct MsgRecord {
  arma::uword block;
  arma::uword sender;
  arma::uword receiver;
  std::uint64_t scalars;
};

// Optional per-block recordings for oracle tests.
struct BlockTrace {
  std::vector<arma::cx_vec> theta;    // theta_b^l after the block
  std::vector<arma::cx_mat> W;        // W_b^l after the block
  std::vector<CrossTermTable> used;   // table consumed by this block
};

struct DebugTrace {
  std::vector<arma::cx_vec> theta0;  // per-BS initial phases
  std::vector<arma::cx_mat> W0;
  std::vector<BlockTrace> blocks;  // length L, index l-1
};

enum class ExecMode { Sequential, Threaded };

struct RunOptions {
  ExecMode mode = ExecMode::Threaded;
  bool debug_trace = false;
};

struct RunResult {
  arma::vec wsr_trace;        // length L, fused-theta WSR after each block
  arma::vec consensus_trace;  // length L
  PrecoderSet final_W;
  arma::cx_vec final_theta;
  double final_wsr = 0.0;
  double final_consensus = 0.0;
  std::uint64_t message_scalars = 0;
  double wallclock_ms = 0.0;
  std::vector<MsgRecord> messages;
  std::optional<DebugTrace> debug;
};

// Runs the L-block unrolled pipeline with one worker per BS and a barrier per
// exchange round. Deterministic: sequential and threaded execution produce
// bit-identical results. Note that a B-BS run is not comparable to a single
// merged super-BS on the same channels: the per-BS power constraints differ.
RunResult run_distributed(const SystemConfig& cfg, const ChannelSet& ch,
                          const RunOptions& opts = {});

// Gradient-free per-BS penalty tuning: coordinate descent over the candidate
// grid minimizing the (consensus error - WSR) loss averaged over a held-out
// batch of seeded draws. Never returns a grid point worse than the config's
// current rho on that batch.
arma::vec tune_rho(const SystemConfig& cfg, const arma::vec& grid);

}  // namespace cellfree

#endif  // CELLFREE_PIPELINE_HPP
