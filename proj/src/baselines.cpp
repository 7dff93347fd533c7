#include "cellfree/baselines.hpp"

#include <cmath>
#include <stdexcept>

#include "cellfree/exchange.hpp"
#include "cellfree/fp_updates.hpp"
#include "cellfree/pipeline.hpp"
#include "cellfree/rng.hpp"
#include "cellfree/theta_solver.hpp"

namespace cellfree {

namespace {

arma::cx_mat composite_matrix(const ChannelSet& ch, arma::uword b,
                              const arma::cx_vec& theta) {
  arma::cx_mat Hhat(ch.N_t, ch.K);
  for (arma::uword k = 0; k < ch.K; ++k)
    Hhat.col(k) =
        composite_channel(ch.h(b, k), ch.G_stack(b), ch.v_stack(k), theta);
  return Hhat;
}

PrecoderSet mrt_precoders(const ChannelSet& ch, const SystemConfig& cfg,
                          const arma::cx_vec& theta) {
  PrecoderSet W(cfg.B);
  for (arma::uword b = 0; b < cfg.B; ++b) {
    const arma::cx_mat Hhat = composite_matrix(ch, b, theta);
    arma::cx_mat Wb(cfg.N_t, cfg.K, arma::fill::zeros);
    const double per_ue = std::sqrt(cfg.p_max[b] / static_cast<double>(cfg.K));
    for (arma::uword k = 0; k < cfg.K; ++k) {
      const double n = arma::norm(Hhat.col(k), 2);
      if (n > 0.0) Wb.col(k) = per_ue * Hhat.col(k) / n;
    }
    normalize_power(Wb, cfg.p_max[b]);
    W(b) = std::move(Wb);
  }
  return W;
}

// Maximizes sum_{b,k} ||hhat_{b,k}(theta)||^2 over unit-modulus theta via the
// BCD solver applied to the negated gain quadratic. Returns the phase vector
// and the per-sweep gain trace through `trace` when non-null.
arma::cx_vec maxao_theta(const ChannelSet& ch, const SystemConfig& cfg) {
  const arma::uword NR = ch.nr();
  arma::cx_mat S_gain(NR, NR, arma::fill::zeros);
  arma::cx_vec z_gain(NR, arma::fill::zeros);
  for (arma::uword b = 0; b < cfg.B; ++b) {
    for (arma::uword k = 0; k < cfg.K; ++k) {
      // M = V_k^H G_b, rows scaled by conj(v_k).
      arma::cx_mat M = ch.G_stack(b);
      M.each_col() %= arma::conj(ch.v_stack(k));
      S_gain += M * M.t();
      z_gain += M * ch.h(b, k);
    }
  }
  ThetaQuadratic q;
  q.S = -S_gain;  // minimize -gain
  q.Z = z_gain;

  arma::cx_vec theta0(NR);
  for (arma::uword n = 0; n < NR; ++n)
    theta0[n] = std::polar(1.0, std::arg(z_gain[n]));
  return solve_theta_bcd(q, theta0, cfg.bcd_max_sweeps, cfg.bcd_tol);
}

}  // namespace

BaselineOutput mrt_random(const ChannelSet& ch, const SystemConfig& config) {
  SystemConfig cfg = config;
  cfg.validate_and_finalize();
  RngStream rng(cfg.seed, DrawKind::BaselineTheta);
  BaselineOutput out;
  out.theta.set_size(ch.nr());
  for (arma::uword n = 0; n < out.theta.n_elem; ++n)
    out.theta[n] = std::polar(1.0, rng.uniform(0.0, 2.0 * arma::datum::pi));
  out.W = mrt_precoders(ch, cfg, out.theta);
  return out;
}

BaselineOutput mrt_maxao(const ChannelSet& ch, const SystemConfig& config) {
  SystemConfig cfg = config;
  cfg.validate_and_finalize();
  BaselineOutput out;
  out.theta = maxao_theta(ch, cfg);
  out.W = mrt_precoders(ch, cfg, out.theta);
  return out;
}

BaselineOutput local_zf_maxao(const ChannelSet& ch, const SystemConfig& config) {
  SystemConfig cfg = config;
  cfg.validate_and_finalize();
  BaselineOutput out;
  out.theta = maxao_theta(ch, cfg);
  out.W.set_size(cfg.B);
  for (arma::uword b = 0; b < cfg.B; ++b) {
    const arma::cx_mat Hhat = composite_matrix(ch, b, out.theta);
    arma::cx_mat gram = Hhat.t() * Hhat;
    const double sigma =
        cfg.K <= cfg.N_t ? 0.0
                         : cfg.noise_power * static_cast<double>(cfg.K) /
                               cfg.p_max[b];
    gram.diag() += sigma;
    arma::cx_mat sol;
    if (!arma::solve(sol, gram, Hhat.t())) {
      gram.diag() += 1e-12 * std::abs(arma::trace(gram)) /
                     static_cast<double>(cfg.K);
      sol = arma::solve(gram, Hhat.t());
    }
    arma::cx_mat Wb = sol.t();  // Hhat (Hhat^H Hhat + sigma I)^{-1}
    const double per_ue = std::sqrt(cfg.p_max[b] / static_cast<double>(cfg.K));
    for (arma::uword k = 0; k < cfg.K; ++k) {
      const double n = arma::norm(Wb.col(k), 2);
      if (n > 0.0) Wb.col(k) *= per_ue / n;
    }
    normalize_power(Wb, cfg.p_max[b]);
    out.W(b) = std::move(Wb);
  }
  return out;
}

BaselineOutput centralized_fp(const ChannelSet& ch, const SystemConfig& config,
                              arma::uword max_iters, double tol) {
  SystemConfig cfg = config;
  cfg.validate_and_finalize();
  if (max_iters == 0) max_iters = cfg.centralized_max_iters;
  if (tol <= 0.0) tol = cfg.centralized_tol;

  BaselineOutput out;
  out.theta = initial_theta(cfg, 0);
  out.W.set_size(cfg.B);
  for (arma::uword b = 0; b < cfg.B; ++b)
    out.W(b) = mrt_initial_precoder(ch, b, cfg.p_max[b]);

  CrossTermTable table = global_cross_table(ch, out.W, out.theta);
  std::vector<double> trace;
  double prev_wsr = wsr_from_table(table.total(), cfg.weights, cfg.noise_power);

  arma::uword it = 0;
  for (; it < max_iters; ++it) {
    const AuxVars aux = update_aux(table, cfg.weights, cfg.noise_power);
    const arma::vec& gamma = aux.gamma;
    const arma::cx_vec& eta = aux.eta;

    // Sequential per-BS precoder updates; the table is kept exact by swapping
    // each BS's own contribution, so every accepted step lowers the global
    // surrogate.
    for (arma::uword b = 0; b < cfg.B; ++b) {
      const CrossTermTable own_old =
          local_cross_contribution(ch, b, out.W(b), out.theta);
      // Full steps: Gauss-Seidel with exact tables is stable, and the
      // backtracking acceptance inside w_layer_step still guards descent.
      out.W(b) = w_layer_step(ch, b, out.theta, gamma, eta, table, out.W(b),
                              cfg.weights, cfg.p_max[b], 1.0);
      table -= own_old;
      table += local_cross_contribution(ch, b, out.W(b), out.theta);
    }

    // Joint phase update: exact quadratic of the full objective in theta,
    // no consensus term.
    arma::field<arma::cx_vec> u(cfg.K, cfg.K);
    for (arma::uword k = 0; k < cfg.K; ++k)
      for (arma::uword j = 0; j < cfg.K; ++j)
        u(k, j).zeros(ch.nr());
    arma::cx_mat t(cfg.K, cfg.K, arma::fill::zeros);
    for (arma::uword b = 0; b < cfg.B; ++b) {
      const arma::cx_mat GW = ch.G_stack(b) * out.W(b);
      for (arma::uword k = 0; k < cfg.K; ++k) {
        const arma::cx_vec vk = arma::conj(ch.v_stack(k));
        for (arma::uword j = 0; j < cfg.K; ++j) u(k, j) += vk % GW.col(j);
        t.row(k) += ch.h(b, k).t() * out.W(b);
      }
    }
    const ThetaQuadratic q = assemble_theta_quadratic(
        u, t, gamma, eta, cfg.weights, 0.0, arma::cx_vec(), arma::cx_vec());
    out.theta = solve_theta_bcd(q, out.theta, cfg.bcd_max_sweeps, cfg.bcd_tol);

    table = global_cross_table(ch, out.W, out.theta);
    const double w = wsr_from_table(table.total(), cfg.weights, cfg.noise_power);
    trace.push_back(w);
    if (std::abs(w - prev_wsr) <= tol * std::max(std::abs(prev_wsr), 1e-12)) {
      prev_wsr = w;
      ++it;
      break;
    }
    prev_wsr = w;
  }

  out.iterations = it;
  out.wsr_trace = arma::vec(trace);
  return out;
}

}  // namespace cellfree
