#include "cellfree/selfcheck.hpp"

#include <cmath>
#include <cstdio>
#include <functional>

#include "cellfree/exchange.hpp"
#include "cellfree/fp_updates.hpp"
#include "cellfree/pipeline.hpp"
#include "cellfree/rng.hpp"
#include "cellfree/scenario.hpp"

namespace cellfree {

namespace {

constexpr double kLn2 = 0.69314718055994530942;
constexpr double kTwoPi = 6.28318530717958647692;

cx crandn(RngStream& rng) {
  return cx(rng.normal(), rng.normal()) / std::sqrt(2.0);
}

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), f, a, b);
  return buf;
}

}  // namespace

arma::cx_vec random_unit_theta(arma::uword n, std::uint64_t seed,
                               std::uint64_t stream) {
  RngStream rng(seed, DrawKind::Test, stream, 1);
  arma::cx_vec theta(n);
  for (arma::uword i = 0; i < n; ++i)
    theta[i] = std::polar(1.0, rng.uniform(0.0, kTwoPi));
  return theta;
}

PrecoderSet random_feasible_precoders(const ChannelSet& ch, double p_max,
                                      std::uint64_t seed,
                                      std::uint64_t stream) {
  RngStream rng(seed, DrawKind::Test, stream, 2);
  PrecoderSet W(ch.B);
  for (arma::uword b = 0; b < ch.B; ++b) {
    arma::cx_mat Wb(ch.N_t, ch.K);
    for (auto& x : Wb) x = crandn(rng);
    normalize_power(Wb, p_max);
    W(b) = std::move(Wb);
  }
  return W;
}

CrossTermTable random_cross_table(arma::uword K, std::uint64_t seed,
                                  std::uint64_t stream) {
  RngStream rng(seed, DrawKind::Test, stream, 3);
  CrossTermTable t(K);
  for (auto& x : t.varpi) x = crandn(rng);
  for (auto& x : t.vartheta) x = crandn(rng);
  return t;
}

ThetaQuadratic random_theta_quadratic(arma::uword nr, std::uint64_t seed,
                                      std::uint64_t stream) {
  RngStream rng(seed, DrawKind::Test, stream, 4);
  arma::cx_mat A(nr, nr + 1);
  for (auto& x : A) x = 0.8 * crandn(rng);
  ThetaQuadratic q;
  q.S = A * A.t();
  q.S.diag() += 0.25;
  q.Z.set_size(nr);
  for (auto& x : q.Z) x = crandn(rng);
  return q;
}

double golden_section_gamma(const arma::cx_mat& A, const arma::vec& gamma,
                            const arma::vec& weights, double noise,
                            arma::uword k, double hi) {
  arma::vec g = gamma;
  auto phi = [&](double x) {
    g[k] = x;
    return f1_from_table(A, g, weights, noise);
  };
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1v = phi(x1), f2v = phi(x2);
  for (int it = 0; it < 200 && (b - a) > 1e-13 * std::max(1.0, hi); ++it) {
    if (f1v <= f2v) {
      b = x2;
      x2 = x1;
      f2v = f1v;
      x1 = b - inv_phi * (b - a);
      f1v = phi(x1);
    } else {
      a = x1;
      x1 = x2;
      f1v = f2v;
      x2 = a + inv_phi * (b - a);
      f2v = phi(x2);
    }
  }
  return 0.5 * (a + b);
}

CheckResult check_transform_tightness(int instances, std::uint64_t seed) {
  CheckResult res{"transform-tightness", true, ""};
  const arma::uword bs[] = {1, 2, 4};
  const arma::uword ks[] = {1, 2, 4};
  double worst = 0.0;
  for (int i = 0; i < instances; ++i) {
    SystemConfig cfg;
    cfg.B = bs[i % 3];
    cfg.K = ks[(i / 3) % 3];
    cfg.R = 1;
    cfg.N = 8;
    cfg.N_t = 2;
    cfg.L = cfg.B + 2;
    cfg.seed = seed + static_cast<std::uint64_t>(i);
    cfg.validate_and_finalize();
    const Scenario sc = build_scenario(cfg);
    const ChannelSet ch = make_channels(cfg, sc);
    const arma::cx_vec theta =
        random_unit_theta(cfg.nr(), cfg.seed, 11);
    const PrecoderSet W =
        random_feasible_precoders(ch, cfg.p_max[0], cfg.seed, 12);

    const CrossTermTable table = global_cross_table(ch, W, theta);
    const arma::cx_mat A = table.total();
    const double w = wsr_from_table(A, cfg.weights, cfg.noise_power);
    const arma::vec gamma = update_gamma(table, cfg.noise_power);
    const double v1 = f1_from_table(A, gamma, cfg.weights, cfg.noise_power);
    const double rel1 = std::abs(v1 + w) / std::max({std::abs(w), std::abs(v1), 1e-12});

    const arma::cx_vec eta =
        update_eta(table, gamma, cfg.weights, cfg.noise_power);
    const double v2 =
        f2_from_table(A, gamma, eta, cfg.weights, cfg.noise_power);
    const double rel2 = std::abs(v2 - v1) / std::max({std::abs(v1), std::abs(v2), 1e-12});

    worst = std::max({worst, rel1, rel2});
    if (rel1 > 1e-9 || rel2 > 1e-9) res.pass = false;
  }
  res.detail = fmt("worst relative mismatch %.3g (tol 1e-9)", worst);
  return res;
}

CheckResult check_closed_form_optimality(int instances, std::uint64_t seed) {
  CheckResult res{"closed-form-optimality", true, ""};
  double worst_gamma = 0.0, worst_eta = 0.0, worst_w = 0.0;

  for (int i = 0; i < instances; ++i) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(i);
    const arma::uword K = 2 + (i % 3);
    RngStream rng(s, DrawKind::Test, 21);
    const double noise = 0.2 + rng.uniform01();
    arma::vec weights(K);
    for (auto& w : weights) w = 0.5 + 1.5 * rng.uniform01();

    const CrossTermTable table = random_cross_table(K, s, 22);
    const arma::cx_mat A = table.total();
    const arma::vec gamma = update_gamma(table, noise);
    const arma::cx_vec eta = update_eta(table, gamma, weights, noise);

    // Closed-form gamma against the 1-D line-search oracle.
    for (arma::uword k = 0; k < K; ++k) {
      const double hi = 10.0 * std::max(gamma[k], 0.1);
      const double gs = golden_section_gamma(A, gamma, weights, noise, k, hi);
      const double err = std::abs(gs - gamma[k]) / std::max(1.0, gamma[k]);
      worst_gamma = std::max(worst_gamma, err);
      if (err > 1e-6) res.pass = false;
    }

    // Finite-difference stationarity of f2 in eta at the closed form.
    {
      arma::cx_vec e = eta;
      double sq = 0.0;
      for (arma::uword k = 0; k < K; ++k) {
        const double h = 1e-6 * (1.0 + std::abs(eta[k]));
        for (int part = 0; part < 2; ++part) {
          const cx delta = part == 0 ? cx(h, 0.0) : cx(0.0, h);
          e[k] = eta[k] + delta;
          const double fp = f2_from_table(A, gamma, e, weights, noise);
          e[k] = eta[k] - delta;
          const double fm = f2_from_table(A, gamma, e, weights, noise);
          e[k] = eta[k];
          sq += std::pow((fp - fm) / (2.0 * h), 2);
        }
      }
      const double norm = std::sqrt(sq) / std::max(1.0, arma::norm(eta, 2));
      worst_eta = std::max(worst_eta, norm);
      if (norm > 1e-6) res.pass = false;
    }

    // Finite-difference stationarity of the local precoding objective at the
    // closed-form precoder (mu_b = 0, cross terms held fixed).
    {
      SystemConfig cfg;
      cfg.B = 2;
      cfg.K = K;
      cfg.R = 1;
      cfg.N = 4;
      cfg.N_t = (i % 2 == 0) ? 2 : 4;  // exercises both K >= N_t and K < N_t
      cfg.L = cfg.B + 2;
      cfg.seed = s;
      cfg.validate_and_finalize();
      const Scenario sc = build_scenario(cfg);
      const ChannelSet ch = make_channels(cfg, sc);
      const arma::cx_vec theta = random_unit_theta(cfg.nr(), s, 23);
      const PrecoderSet Wprev =
          random_feasible_precoders(ch, cfg.p_max[0], s, 24);
      const arma::uword b = 0;

      arma::cx_mat Hhat(cfg.N_t, K);
      for (arma::uword j = 0; j < K; ++j)
        Hhat.col(j) = composite_channel(ch.h(b, j), ch.G_stack(b),
                                        ch.v_stack(j), theta);
      // Residual table plays the stale cross-term information.
      const arma::cx_mat Res = A - Hhat.t() * Wprev(b);

      auto local_obj = [&](const arma::cx_mat& Wb) {
        double sum = 0.0;
        const arma::cx_mat Anew = Res + Hhat.t() * Wb;
        for (arma::uword k = 0; k < K; ++k) {
          const double c = std::sqrt((1.0 + gamma[k]) * weights[k]);
          double den = 0.0;
          for (arma::uword j = 0; j < K; ++j) den += std::norm(Anew(k, j));
          sum += std::norm(eta[k]) * den -
                 2.0 * c * std::real(eta[k] * Anew(k, k));
        }
        return sum / kLn2;
      };

      const arma::cx_mat Wopt =
          update_w(ch, b, theta, gamma, eta, table, Wprev(b), weights);
      const double scale = std::max(arma::norm(Wopt, "fro"), 1e-9);
      double sq = 0.0;
      arma::cx_mat Wp = Wopt;
      for (arma::uword idx = 0; idx < Wopt.n_elem; ++idx) {
        const double h = 1e-6 * (1.0 + std::abs(Wopt[idx]));
        for (int part = 0; part < 2; ++part) {
          const cx delta = part == 0 ? cx(h, 0.0) : cx(0.0, h);
          Wp[idx] = Wopt[idx] + delta;
          const double fp = local_obj(Wp);
          Wp[idx] = Wopt[idx] - delta;
          const double fm = local_obj(Wp);
          Wp[idx] = Wopt[idx];
          sq += std::pow((fp - fm) / (2.0 * h), 2);
        }
      }
      const double norm = std::sqrt(sq) / scale;
      worst_w = std::max(worst_w, norm);
      if (norm > 1e-5) res.pass = false;

      // The update never worsens the local objective it minimizes.
      if (local_obj(Wopt) > local_obj(Wprev(b)) + 1e-9) res.pass = false;
    }
  }
  res.detail = fmt("worst gamma err %.3g, worst fd norm %.3g", worst_gamma,
                   std::max(worst_eta, worst_w));
  return res;
}

CheckResult check_theta_bcd_vs_grid(int instances, std::uint64_t seed,
                                    arma::uword grid_points) {
  CheckResult res{"theta-bcd-vs-grid", true, ""};
  double worst = -1e300;
  std::vector<cx> phase(grid_points);
  for (arma::uword g = 0; g < grid_points; ++g)
    phase[g] = std::polar(1.0, kTwoPi * static_cast<double>(g) /
                                   static_cast<double>(grid_points));

  for (int i = 0; i < instances; ++i) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(i);
    const ThetaQuadratic q = random_theta_quadratic(2, s, 31);
    const arma::cx_vec theta0 = random_unit_theta(2, s, 32);
    const arma::cx_vec theta = solve_theta_bcd(q, theta0, 200, 1e-12);
    const double got = theta_objective(q, theta);

    // Exhaustive unit-phase grid; NR = 2 so the form is
    // const + 2 Re{conj(t0) S01 t1} - 2 Re{conj(t0) Z0} - 2 Re{conj(t1) Z1}.
    const double c0 = std::real(q.S(0, 0)) + std::real(q.S(1, 1));
    const cx s01 = q.S(0, 1);
    double best = 1e300;
    for (arma::uword a = 0; a < grid_points; ++a) {
      const cx t0c = std::conj(phase[a]);
      const cx coupled = t0c * s01;
      const double lin0 = -2.0 * std::real(t0c * q.Z[0]);
      for (arma::uword g = 0; g < grid_points; ++g) {
        const double obj = c0 + 2.0 * std::real(coupled * phase[g]) + lin0 -
                           2.0 * std::real(std::conj(phase[g]) * q.Z[1]);
        if (obj < best) best = obj;
      }
    }
    worst = std::max(worst, got - best);
    if (got > best + 1e-3) res.pass = false;
  }
  res.detail = fmt("worst objective excess over grid %.3g (tol 1e-3)", worst);
  return res;
}

CheckResult check_exchange_exactness(const std::vector<arma::uword>& bs_counts,
                                     std::uint64_t seed) {
  CheckResult res{"exchange-exactness", true, ""};
  double worst = 0.0;

  for (const arma::uword B : bs_counts) {
    SystemConfig cfg;
    cfg.B = B;
    cfg.R = 2;
    cfg.K = 3;
    cfg.N = 6;
    cfg.N_t = 2;
    cfg.L = B + 2;
    cfg.seed = seed + B;
    cfg.validate_and_finalize();
    const Scenario sc = build_scenario(cfg);
    const ChannelSet ch = make_channels(cfg, sc);

    RunOptions opts;
    opts.mode = ExecMode::Sequential;
    opts.debug_trace = true;
    const RunResult run = run_distributed(cfg, ch, opts);
    const DebugTrace& dbg = *run.debug;

    auto own_at = [&](arma::uword b, arma::uword s_block) {
      if (s_block == 0)
        return local_cross_contribution(ch, b, dbg.W0[b], dbg.theta0[b]);
      return local_cross_contribution(ch, b, dbg.blocks[s_block - 1].W[b],
                                      dbg.blocks[s_block - 1].theta[b]);
    };

    // Replay oracle: the table consumed by block l must equal the sum of each
    // BS's contribution at exactly the vintage the ring could have delivered.
    for (arma::uword l = 1; l <= cfg.L; ++l) {
      for (arma::uword b = 0; b < cfg.B; ++b) {
        CrossTermTable expect = own_at(b, l - 1);
        const arma::uword dmax = std::min<arma::uword>(l - 1, cfg.B - 1);
        for (arma::uword d = 1; d <= dmax; ++d)
          expect += own_at((b + d) % cfg.B, l - d);
        const CrossTermTable& got = dbg.blocks[l - 1].used[b];
        const double err =
            arma::abs(got.varpi - expect.varpi).max() +
            arma::abs(got.vartheta - expect.vartheta).max();
        worst = std::max(worst, err);
        if (err > 1e-10) res.pass = false;
      }
    }

    if (run.message_scalars != count_overhead(cfg.B, cfg.L, cfg.K, cfg.R, cfg.N))
      res.pass = false;
  }

  // Exact full-scale message volume at B=4, L=6, K=4, R=2, N=50.
  {
    SystemConfig cfg;
    cfg.B = 4;
    cfg.R = 2;
    cfg.K = 4;
    cfg.N = 50;
    cfg.N_t = 2;
    cfg.L = 6;
    cfg.seed = seed;
    cfg.validate_and_finalize();
    const ChannelSet ch = make_channels(cfg, build_scenario(cfg));
    RunOptions opts;
    opts.mode = ExecMode::Sequential;
    const RunResult run = run_distributed(cfg, ch, opts);
    if (run.message_scalars != 2640 ||
        count_overhead(4, 6, 4, 2, 50) != 2640)
      res.pass = false;
  }

  res.detail = fmt("worst entrywise replay error %.3g (tol 1e-10)", worst);
  return res;
}

CheckResult check_run_determinism(std::uint64_t seed) {
  CheckResult res{"run-determinism", true, ""};
  SystemConfig cfg;
  cfg.B = 3;
  cfg.R = 2;
  cfg.K = 3;
  cfg.N = 6;
  cfg.N_t = 2;
  cfg.L = 5;
  cfg.seed = seed;
  cfg.validate_and_finalize();
  const ChannelSet ch = make_channels(cfg, build_scenario(cfg));

  auto bits_equal = [](const RunResult& a, const RunResult& b) {
    auto veq = [](const arma::cx_vec& x, const arma::cx_vec& y) {
      return x.n_elem == y.n_elem && std::equal(x.begin(), x.end(), y.begin());
    };
    if (a.wsr_trace.n_elem != b.wsr_trace.n_elem ||
        !std::equal(a.wsr_trace.begin(), a.wsr_trace.end(),
                    b.wsr_trace.begin()))
      return false;
    if (!std::equal(a.consensus_trace.begin(), a.consensus_trace.end(),
                    b.consensus_trace.begin()))
      return false;
    if (!veq(a.final_theta, b.final_theta)) return false;
    for (arma::uword i = 0; i < a.final_W.n_elem; ++i) {
      if (!std::equal(a.final_W(i).begin(), a.final_W(i).end(),
                      b.final_W(i).begin()))
        return false;
    }
    return a.message_scalars == b.message_scalars;
  };

  RunOptions seq, thr;
  seq.mode = ExecMode::Sequential;
  thr.mode = ExecMode::Threaded;
  const RunResult r1 = run_distributed(cfg, ch, seq);
  const RunResult r2 = run_distributed(cfg, ch, thr);
  const RunResult r3 = run_distributed(cfg, ch, thr);
  if (!bits_equal(r1, r2) || !bits_equal(r2, r3)) res.pass = false;
  res.detail = "sequential vs threaded vs repeat";
  return res;
}

}  // namespace cellfree
