#include "cellfree/pipeline.hpp"

#include <barrier>
#include <chrono>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

#include "cellfree/fp_updates.hpp"
#include "cellfree/rng.hpp"
#include "cellfree/scenario.hpp"
#include "cellfree/theta_solver.hpp"

namespace cellfree {

BlockKind block_kind(arma::uword l, arma::uword B, arma::uword L) {
  if (l < 1 || l > L || L < B)
    throw std::invalid_argument("block_kind: need 1 <= l <= L and L >= B");
  if (l == 1) return BlockKind::Ini;
  if (l == L) return BlockKind::Out;
  if (l <= B - 1) return BlockKind::Mid1;
  if (l == B) return BlockKind::Mid2;
  return BlockKind::Mid3;
}

arma::cx_vec initial_theta(const SystemConfig& cfg, arma::uword b) {
  RngStream rng(cfg.seed, DrawKind::ThetaInit, b);
  arma::cx_vec theta(cfg.nr());
  for (arma::uword n = 0; n < theta.n_elem; ++n)
    theta[n] = std::polar(1.0, rng.uniform(0.0, 2.0 * arma::datum::pi));
  return theta;
}

arma::cx_mat mrt_initial_precoder(const ChannelSet& ch, arma::uword b,
                                  double p_max) {
  arma::cx_mat W(ch.N_t, ch.K, arma::fill::zeros);
  const double per_ue = std::sqrt(p_max / static_cast<double>(ch.K));
  for (arma::uword k = 0; k < ch.K; ++k) {
    const double n = arma::norm(ch.h(b, k), 2);
    if (n > 0.0) W.col(k) = per_ue * ch.h(b, k) / n;
  }
  normalize_power(W, p_max);
  return W;
}

arma::cx_vec fuse_theta(const std::vector<arma::cx_vec>& thetas) {
  if (thetas.empty()) throw std::invalid_argument("fuse_theta: empty input");
  arma::cx_vec sum = thetas[0];
  for (std::size_t b = 1; b < thetas.size(); ++b) sum += thetas[b];
  arma::cx_vec fused(sum.n_elem);
  for (arma::uword n = 0; n < sum.n_elem; ++n) {
    const double mag = std::abs(sum[n]);
    fused[n] = mag > 1e-300 ? sum[n] / mag : thetas[0][n];
  }
  return fused;
}

namespace {

struct BsWorkerState {
  arma::cx_mat W;          // W_b^{l-1} entering a block, W_b^l after it
  arma::cx_vec theta;      // likewise for theta_b
  arma::cx_vec lambda;
  CrossTermTable used;     // table consumed by the current block
  CrossTermTable in_prev;  // hatted table received at the previous exchange
  arma::cx_vec theta_nb;   // most recently received neighbour phase vector
  HistoryBuffer history;

  explicit BsWorkerState(arma::uword depth) : history(depth) {}
};

struct SharedRun {
  const SystemConfig* cfg;
  const ChannelSet* ch;
  bool debug;

  std::vector<std::optional<ExchangeMessage>> mailbox;  // slot per sender
  std::vector<BlockTrace> blocks;                       // per block l-1
  std::vector<MsgRecord> messages;                      // filled post-run
  std::vector<arma::cx_vec> theta0;
  std::vector<arma::cx_mat> W0;
};

// One BS's work for block l before the exchange round. Returns the outgoing
// message when this block sends one.
std::optional<ExchangeMessage> compute_block(arma::uword b, arma::uword l,
                                             BsWorkerState& st, SharedRun& run) {
  const SystemConfig& cfg = *run.cfg;
  const ChannelSet& ch = *run.ch;
  const BlockKind kind = block_kind(l, cfg.B, cfg.L);
  const bool single_bs = cfg.B == 1;
  // No consensus force before the first exchange round delivers a reference
  // (initial phases are independent per BS); none at all for a single BS.
  const double rho_eff = (single_bs || l == 1) ? 0.0 : cfg.rho[b];

  if (l == 1) {
    const InitCrossTerms init = init_cross_terms(ch, b, st.W, st.theta);
    st.used = init.used;
    st.in_prev = init.outgoing;
  }

  // A-Layer.
  const AuxVars aux = update_aux(st.used, cfg.weights, cfg.noise_power);
  const arma::vec& gamma = aux.gamma;
  const arma::cx_vec& eta = aux.eta;

  // W-Layer; own stale contribution is captured first so the theta step can
  // strip it from the used table.
  const CrossTermTable own_prev =
      local_cross_contribution(ch, b, st.W, st.theta);
  const arma::cx_mat W_new =
      w_layer_step(ch, b, st.theta, gamma, eta, st.used, st.W, cfg.weights,
                   cfg.p_max[b], cfg.w_damping);

  // Theta-Block on the fresh precoder.
  CrossTermTable others = st.used;
  others -= own_prev;
  ThetaQuadratic q;
  q.S = assemble_S(ch, b, W_new, eta, rho_eff);
  q.Z = assemble_Z(ch, b, W_new, eta, gamma, cfg.weights, others, st.lambda,
                   rho_eff, st.theta_nb);
  const arma::cx_vec theta_new =
      solve_theta_bcd(q, st.theta, cfg.bcd_max_sweeps, cfg.bcd_tol);

  st.W = W_new;
  st.theta = theta_new;

  // Lambda-Layer against the most recently received neighbour phase vector
  // (one exchange behind, the only causally available one). Nothing has been
  // received during the Ini block, so the multiplier starts moving at l = 2.
  if (kind != BlockKind::Out && !single_bs && l >= 2)
    st.lambda += cfg.rho[b] * (st.theta - st.theta_nb);

  // Trace slots are per-BS, no contention.
  run.blocks[l - 1].theta[b] = st.theta;
  run.blocks[l - 1].W[b] = st.W;
  if (run.debug) run.blocks[l - 1].used[b] = st.used;

  if (kind == BlockKind::Out) return std::nullopt;

  if (single_bs) {
    // Degenerate ring: refresh the local table, send nothing.
    st.used = local_cross_contribution(ch, b, st.W, st.theta);
    return std::nullopt;
  }

  // The outgoing message is built before the history rolls over: the Mid3
  // form drops the own contribution of block l-B, the oldest one retained.
  const CrossTermTable own_now = local_cross_contribution(ch, b, st.W, st.theta);
  ExchangeMessage msg;
  msg.sender = b;
  msg.block = l;
  msg.theta = st.theta;
  if (kind == BlockKind::Mid3) {
    msg.hat = outgoing_replace(
        st.in_prev,
        local_cross_contribution(ch, b, st.history.w_at(l - cfg.B),
                                 st.history.theta_at(l - cfg.B)),
        own_now);
  } else {
    msg.hat = outgoing_accumulate(st.in_prev, own_now);
  }
  st.history.push(l, st.theta, st.W);
  return msg;
}

// Consumes the message received in block l's exchange round.
void consume_block(arma::uword b, arma::uword l, BsWorkerState& st,
                   SharedRun& run, const std::optional<ExchangeMessage>& inbox) {
  const SystemConfig& cfg = *run.cfg;
  const ChannelSet& ch = *run.ch;
  if (!inbox)
    throw std::runtime_error("exchange: missing inbox at block " +
                             std::to_string(l));
  const BlockKind kind = block_kind(l, cfg.B, cfg.L);
  const CrossTermTable own_now = local_cross_contribution(ch, b, st.W, st.theta);

  if (kind == BlockKind::Ini || kind == BlockKind::Mid1) {
    st.used = used_accumulate(inbox->hat, own_now);
  } else {
    // Mid2 drops the own block-1 contribution that came back around the
    // ring; Mid3 drops the block l-B+1 one.
    const arma::uword obsolete = kind == BlockKind::Mid2 ? 1 : l - cfg.B + 1;
    st.used = used_replace(
        inbox->hat,
        local_cross_contribution(ch, b, st.history.w_at(obsolete),
                                 st.history.theta_at(obsolete)),
        own_now);
  }
  st.in_prev = inbox->hat;
  st.theta_nb = inbox->theta;
}

void worker_loop(arma::uword b, BsWorkerState& st, SharedRun& run,
                 std::barrier<>& sync) {
  const SystemConfig& cfg = *run.cfg;
  const RingRoute route = ring_route(b, cfg.B);
  for (arma::uword l = 1; l <= cfg.L; ++l) {
    std::optional<ExchangeMessage> out = compute_block(b, l, st, run);
    if (l < cfg.L && cfg.B > 1) {
      run.mailbox[b] = std::move(out);
      sync.arrive_and_wait();
      consume_block(b, l, st, run, run.mailbox[route.recv_from]);
      sync.arrive_and_wait();
    }
  }
}

}  // namespace

RunResult run_distributed(const SystemConfig& config, const ChannelSet& ch,
                          const RunOptions& opts) {
  SystemConfig cfg = config;
  cfg.validate_and_finalize();
  if (cfg.L < cfg.B)
    throw std::invalid_argument("run_distributed: requires L >= B");
  if (ch.B != cfg.B || ch.K != cfg.K || ch.N_t != cfg.N_t || ch.nr() != cfg.nr())
    throw std::invalid_argument("run_distributed: channel/config mismatch");

  const auto t_start = std::chrono::steady_clock::now();

  SharedRun run;
  run.cfg = &cfg;
  run.ch = &ch;
  run.debug = opts.debug_trace;
  run.mailbox.resize(cfg.B);
  run.blocks.resize(cfg.L);
  for (auto& bt : run.blocks) {
    bt.theta.resize(cfg.B);
    bt.W.resize(cfg.B);
    if (run.debug) bt.used.resize(cfg.B);
  }

  run.theta0.resize(cfg.B);
  run.W0.resize(cfg.B);

  std::vector<BsWorkerState> states;
  states.reserve(cfg.B);
  for (arma::uword b = 0; b < cfg.B; ++b) {
    BsWorkerState st(cfg.B);
    st.W = mrt_initial_precoder(ch, b, cfg.p_max[b]);
    st.theta = initial_theta(cfg, b);
    st.lambda.zeros(cfg.nr());
    st.theta_nb = st.theta;  // placeholder until the first exchange
    st.history.push(0, st.theta, st.W);
    run.theta0[b] = st.theta;
    run.W0[b] = st.W;
    states.push_back(std::move(st));
  }

  if (opts.mode == ExecMode::Threaded && cfg.B > 1) {
    std::barrier<> sync(static_cast<std::ptrdiff_t>(cfg.B));
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(cfg.B);
    for (arma::uword b = 0; b < cfg.B; ++b) {
      threads.emplace_back([&, b] {
        try {
          worker_loop(b, states[b], run, sync);
        } catch (...) {
          errors[b] = std::current_exception();
          // Unblock peers so the run can terminate; their results are
          // discarded once the error is rethrown.
          sync.arrive_and_drop();
        }
      });
    }
    for (auto& t : threads) t.join();
    for (arma::uword b = 0; b < cfg.B; ++b)
      if (errors[b]) std::rethrow_exception(errors[b]);
  } else {
    // Sequential schedule with the same phase structure.
    for (arma::uword l = 1; l <= cfg.L; ++l) {
      for (arma::uword b = 0; b < cfg.B; ++b)
        run.mailbox[b] = compute_block(b, l, states[b], run);
      if (l < cfg.L && cfg.B > 1) {
        for (arma::uword b = 0; b < cfg.B; ++b)
          consume_block(b, l, states[b], run,
                        run.mailbox[ring_route(b, cfg.B).recv_from]);
      }
    }
  }

  RunResult res;
  res.wsr_trace.set_size(cfg.L);
  res.consensus_trace.set_size(cfg.L);
  for (arma::uword l = 1; l <= cfg.L; ++l) {
    const BlockTrace& bt = run.blocks[l - 1];
    PrecoderSet W(cfg.B);
    for (arma::uword b = 0; b < cfg.B; ++b) W(b) = bt.W[b];
    const arma::cx_vec fused = fuse_theta(bt.theta);
    res.wsr_trace[l - 1] = wsr(ch, W, fused, cfg.weights, cfg.noise_power);
    res.consensus_trace[l - 1] = consensus_error(bt.theta);
  }

  res.final_W.set_size(cfg.B);
  for (arma::uword b = 0; b < cfg.B; ++b)
    res.final_W(b) = run.blocks[cfg.L - 1].W[b];
  res.final_theta = fuse_theta(run.blocks[cfg.L - 1].theta);
  res.final_wsr = res.wsr_trace[cfg.L - 1];
  res.final_consensus = res.consensus_trace[cfg.L - 1];

  if (cfg.B > 1) {
    for (arma::uword l = 1; l + 1 <= cfg.L; ++l) {
      for (arma::uword b = 0; b < cfg.B; ++b) {
        const std::uint64_t n = 2ull * cfg.K * cfg.K + cfg.nr();
        res.messages.push_back({l, b, ring_route(b, cfg.B).send_to, n});
        res.message_scalars += n;
      }
    }
  }

  if (opts.debug_trace) {
    DebugTrace dbg;
    dbg.theta0 = run.theta0;
    dbg.W0 = run.W0;
    dbg.blocks = run.blocks;
    res.debug = std::move(dbg);
  }

  res.wallclock_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                t_start)
          .count();
  return res;
}

arma::vec tune_rho(const SystemConfig& config, const arma::vec& grid) {
  SystemConfig cfg = config;
  cfg.validate_and_finalize();
  if (grid.n_elem == 0) throw std::invalid_argument("tune_rho: empty grid");

  // Held-out batch of full scenario + channel draws.
  struct Sample {
    SystemConfig cfg;
    ChannelSet ch;
  };
  std::vector<Sample> batch;
  batch.reserve(cfg.tune_batch);
  for (arma::uword q = 0; q < cfg.tune_batch; ++q) {
    RngStream rng(cfg.seed, DrawKind::TuneBatch, q);
    SystemConfig c = cfg;
    c.seed = rng.next_u64();
    const Scenario sc = build_scenario(c);
    batch.push_back({c, make_channels(c, sc)});
  }

  RunOptions opts;
  opts.mode = ExecMode::Sequential;
  auto batch_loss = [&](const arma::vec& rho) {
    arma::vec ce(batch.size()), ws(batch.size());
    for (std::size_t q = 0; q < batch.size(); ++q) {
      SystemConfig c = batch[q].cfg;
      c.rho = rho;
      const RunResult r = run_distributed(c, batch[q].ch, opts);
      ce[q] = r.final_consensus;
      ws[q] = r.final_wsr;
    }
    return loss_batch(ce, ws);
  };

  arma::vec rho = cfg.rho;
  double best = batch_loss(rho);
  for (int pass = 0; pass < 2; ++pass) {
    bool changed = false;
    for (arma::uword b = 0; b < cfg.B; ++b) {
      for (arma::uword g = 0; g < grid.n_elem; ++g) {
        if (grid[g] == rho[b]) continue;
        arma::vec cand = rho;
        cand[b] = grid[g];
        const double l = batch_loss(cand);
        if (l < best) {
          best = l;
          rho = cand;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  return rho;
}

}  // namespace cellfree
