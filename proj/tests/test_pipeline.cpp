#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cellfree/fp_updates.hpp"
#include "cellfree/pipeline.hpp"
#include "cellfree/rng.hpp"
#include "cellfree/selfcheck.hpp"
#include "cellfree/theta_solver.hpp"
#include "test_util.hpp"

using namespace cellfree;

TEST_CASE("block taxonomy") {
  auto kinds = [](arma::uword B, arma::uword L) {
    std::vector<BlockKind> v;
    for (arma::uword l = 1; l <= L; ++l) v.push_back(block_kind(l, B, L));
    return v;
  };

  const auto a = kinds(4, 6);
  CHECK(a == std::vector<BlockKind>{BlockKind::Ini, BlockKind::Mid1,
                                    BlockKind::Mid1, BlockKind::Mid2,
                                    BlockKind::Mid3, BlockKind::Out});

  // L = B: no Mid2/Mid3 blocks at all.
  const auto b = kinds(4, 4);
  CHECK(b == std::vector<BlockKind>{BlockKind::Ini, BlockKind::Mid1,
                                    BlockKind::Mid1, BlockKind::Out});

  const auto c = kinds(2, 4);
  CHECK(c == std::vector<BlockKind>{BlockKind::Ini, BlockKind::Mid2,
                                    BlockKind::Mid3, BlockKind::Out});

  CHECK_THROWS_AS(block_kind(0, 2, 4), std::invalid_argument);
  CHECK_THROWS_AS(block_kind(5, 2, 4), std::invalid_argument);
}

TEST_CASE("out-block sends nothing") {
  auto cfg = cftest::small_config(3, 1, 2, 4, 2, 70);
  const ChannelSet ch = cftest::channels_for(cfg);
  RunOptions opts;
  opts.mode = ExecMode::Sequential;
  const RunResult run = run_distributed(cfg, ch, opts);
  for (const auto& m : run.messages) CHECK(m.block < cfg.L);
  CHECK(run.messages.size() == cfg.B * (cfg.L - 1));
}

TEST_CASE("B=1 reduces to a plain single-cell FP loop") {
  auto cfg = cftest::small_config(1, 2, 3, 6, 2, 71);
  cfg.L = 4;
  const ChannelSet ch = cftest::channels_for(cfg);
  RunOptions opts;
  opts.mode = ExecMode::Sequential;
  opts.debug_trace = true;
  const RunResult run = run_distributed(cfg, ch, opts);

  // Reference loop composed directly from the update operators.
  arma::cx_mat W = mrt_initial_precoder(ch, 0, cfg.p_max[0]);
  arma::cx_vec theta = initial_theta(cfg, 0);
  for (arma::uword l = 1; l <= cfg.L; ++l) {
    const CrossTermTable table = local_cross_contribution(ch, 0, W, theta);
    const arma::vec gamma = update_gamma(table, cfg.noise_power);
    const arma::cx_vec eta =
        update_eta(table, gamma, cfg.weights, cfg.noise_power);
    const arma::cx_mat W_new =
        w_layer_step(ch, 0, theta, gamma, eta, table, W, cfg.weights,
                     cfg.p_max[0], cfg.w_damping);

    CrossTermTable others = table;
    others -= local_cross_contribution(ch, 0, W, theta);
    ThetaQuadratic q;
    q.S = assemble_S(ch, 0, W_new, eta, 0.0);
    q.Z = assemble_Z(ch, 0, W_new, eta, gamma, cfg.weights, others,
                     arma::cx_vec(cfg.nr(), arma::fill::zeros), 0.0, theta);
    W = W_new;
    theta = solve_theta_bcd(q, theta, cfg.bcd_max_sweeps, cfg.bcd_tol);

    CHECK(cftest::max_abs(run.debug->blocks[l - 1].W[0] - W) < 1e-13);
    CHECK(cftest::max_abs(arma::cx_mat(run.debug->blocks[l - 1].theta[0] - theta)) <
          1e-13);
  }
}

TEST_CASE("single-BS per-block WSR is non-decreasing on most seeds") {
  int ok = 0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    auto cfg = cftest::small_config(1, 2, 3, 8, 2, 700 + s);
    cfg.L = 6;
    const ChannelSet ch = cftest::channels_for(cfg);
    RunOptions opts;
    opts.mode = ExecMode::Sequential;
    const RunResult run = run_distributed(cfg, ch, opts);
    bool mono = true;
    for (arma::uword l = 2; l < cfg.L; ++l)
      if (run.wsr_trace[l] < run.wsr_trace[l - 1] - 1e-9) mono = false;
    if (mono) ++ok;
  }
  CHECK(ok >= seeds * 9 / 10);
}

TEST_CASE("feasibility at every block") {
  auto cfg = cftest::small_config(3, 2, 3, 6, 2, 72);
  const ChannelSet ch = cftest::channels_for(cfg);
  RunOptions opts;
  opts.mode = ExecMode::Sequential;
  opts.debug_trace = true;
  const RunResult run = run_distributed(cfg, ch, opts);
  for (arma::uword l = 0; l < cfg.L; ++l) {
    for (arma::uword b = 0; b < cfg.B; ++b) {
      const double p =
          std::pow(arma::norm(run.debug->blocks[l].W[b], "fro"), 2);
      CHECK(std::abs(p - cfg.p_max[b]) <= 1e-9 * cfg.p_max[b]);
      for (const auto& e : run.debug->blocks[l].theta[b])
        CHECK(std::abs(std::abs(e) - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("determinism across execution modes and repeats") {
  const CheckResult r = check_run_determinism(73);
  INFO(r.detail);
  CHECK(r.pass);
}

TEST_CASE("consensus error decays over the run") {
  int ok = 0;
  const int seeds = 12;
  for (int s = 0; s < seeds; ++s) {
    auto cfg = cftest::small_config(4, 2, 3, 8, 2, 7000 + s);
    const ChannelSet ch = cftest::channels_for(cfg);
    RunOptions opts;
    opts.mode = ExecMode::Sequential;
    const RunResult run = run_distributed(cfg, ch, opts);
    CHECK(run.consensus_trace.is_finite());
    if (run.final_consensus < run.consensus_trace[0]) ++ok;
  }
  CHECK(ok >= seeds * 8 / 10);
}

TEST_CASE("run validates inputs") {
  auto cfg = cftest::small_config(3, 1, 2, 4, 2, 74);
  const ChannelSet ch = cftest::channels_for(cfg);
  auto bad = cfg;
  bad.L = 2;  // < B
  CHECK_THROWS_AS(run_distributed(bad, ch), std::invalid_argument);

  auto mismatched = cftest::small_config(2, 1, 2, 4, 2, 74);
  CHECK_THROWS_AS(run_distributed(mismatched, ch), std::invalid_argument);
}

TEST_CASE("tune_rho") {
  auto cfg = cftest::small_config(2, 1, 2, 4, 2, 75);
  cfg.tune_batch = 3;

  // A single candidate equal to the default is returned unchanged.
  const arma::vec single = tune_rho(cfg, arma::vec{1.0});
  CHECK(single.n_elem == cfg.B);
  CHECK(single[0] == doctest::Approx(1.0));
  CHECK(single[1] == doctest::Approx(1.0));

  // Shared loss evaluator for the guarantees below.
  auto batch_loss = [&](const arma::vec& rho) {
    arma::vec ce(cfg.tune_batch), ws(cfg.tune_batch);
    for (arma::uword q = 0; q < cfg.tune_batch; ++q) {
      RngStream rng(cfg.seed, DrawKind::TuneBatch, q);
      SystemConfig c = cfg;
      c.seed = rng.next_u64();
      c.rho = rho;
      RunOptions opts;
      opts.mode = ExecMode::Sequential;
      const RunResult r = run_distributed(c, cftest::channels_for(c), opts);
      ce[q] = r.final_consensus;
      ws[q] = r.final_wsr;
    }
    return loss_batch(ce, ws);
  };

  const double default_loss = batch_loss(arma::vec(cfg.B, arma::fill::ones));
  const arma::vec narrow = tune_rho(cfg, arma::vec{1.0});
  const arma::vec wide = tune_rho(cfg, arma::vec{0.1, 1.0, 10.0});

  // Tuning over a superset never increases the batch loss, and the result is
  // never worse than the default.
  CHECK(batch_loss(wide) <= batch_loss(narrow) + 1e-12);
  CHECK(batch_loss(wide) <= default_loss + 1e-12);

  CHECK_THROWS_AS(tune_rho(cfg, arma::vec{}), std::invalid_argument);
}
