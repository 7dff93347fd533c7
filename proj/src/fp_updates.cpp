#include "cellfree/fp_updates.hpp"

#include <cmath>
#include <stdexcept>

namespace cellfree {

arma::vec update_gamma(const CrossTermTable& cross, double noise) {
  if (noise <= 0.0)
    throw std::invalid_argument("update_gamma: noise power must be > 0");
  const arma::cx_mat A = cross.total();
  if (!A.is_finite())
    throw std::invalid_argument("update_gamma: non-finite cross-term table");
  const arma::uword K = A.n_rows;
  arma::vec gamma(K);
  for (arma::uword k = 0; k < K; ++k)
    gamma[k] = sinr_from_table(A, k, noise);
  return gamma;
}

arma::cx_vec update_eta(const CrossTermTable& cross, const arma::vec& gamma,
                        const arma::vec& weights, double noise) {
  if (noise <= 0.0)
    throw std::invalid_argument("update_eta: noise power must be > 0");
  const arma::cx_mat A = cross.total();
  const arma::uword K = A.n_rows;
  arma::cx_vec eta(K);
  for (arma::uword k = 0; k < K; ++k) {
    double den = noise;
    for (arma::uword j = 0; j < K; ++j) den += std::norm(A(k, j));
    eta[k] = std::conj(A(k, k)) * std::sqrt((1.0 + gamma[k]) * weights[k]) / den;
  }
  return eta;
}

AuxVars update_aux(const CrossTermTable& cross, const arma::vec& weights,
                   double noise) {
  AuxVars aux;
  aux.gamma = update_gamma(cross, noise);
  aux.eta = update_eta(cross, aux.gamma, weights, noise);
  return aux;
}

arma::cx_mat update_w(const ChannelSet& ch, arma::uword b,
                      const arma::cx_vec& theta_b, const arma::vec& gamma,
                      const arma::cx_vec& eta, const CrossTermTable& cross,
                      const arma::cx_mat& W_prev, const arma::vec& weights) {
  const arma::uword K = ch.K;
  const arma::uword N_t = ch.N_t;
  if (W_prev.n_rows != N_t || W_prev.n_cols != K)
    throw std::invalid_argument("update_w: W_prev shape mismatch");

  // Composite channels under this BS's theta, one column per UE.
  arma::cx_mat Hhat(N_t, K);
  for (arma::uword j = 0; j < K; ++j)
    Hhat.col(j) = composite_channel(ch.h(b, j), ch.G_stack(b), ch.v_stack(j),
                                    theta_b);

  const arma::vec eta2 = arma::square(arma::abs(eta));

  arma::cx_mat M = Hhat * arma::diagmat(arma::conv_to<arma::cx_vec>::from(eta2)) *
                   Hhat.t();
  const double tr = std::real(arma::sum(M.diag()));
  double eps = 1e-12 * tr / static_cast<double>(N_t);
  if (!(eps > 0.0)) eps = 1e-12;
  M.diag() += eps;

  // Residual of other BSs' contributions: R(j,k) = A_jk - hhat_j^H w_prev_k.
  const arma::cx_mat Res = cross.total() - Hhat.t() * W_prev;

  arma::cx_mat rhs(N_t, K);
  for (arma::uword k = 0; k < K; ++k) {
    const double c = std::sqrt((1.0 + gamma[k]) * weights[k]);
    arma::cx_vec omega(N_t, arma::fill::zeros);
    for (arma::uword j = 0; j < K; ++j)
      omega += eta2[j] * Hhat.col(j) * Res(j, k);
    rhs.col(k) = c * std::conj(eta[k]) * Hhat.col(k) - omega;
  }

  arma::cx_mat W_new;
  if (!arma::solve(W_new, M, rhs))
    throw std::runtime_error("update_w: degenerate precoder update");
  return W_new;
}

bool normalize_power(arma::cx_mat& W_b, double p_max) {
  if (p_max <= 0.0)
    throw std::invalid_argument("normalize_power: p_max must be > 0");
  const double power = std::pow(arma::norm(W_b, "fro"), 2);
  if (power <= 0.0) return false;
  W_b *= std::sqrt(p_max / power);
  return true;
}

arma::cx_mat w_layer_step(const ChannelSet& ch, arma::uword b,
                          const arma::cx_vec& theta_b, const arma::vec& gamma,
                          const arma::cx_vec& eta, const CrossTermTable& cross,
                          const arma::cx_mat& W_prev, const arma::vec& weights,
                          double p_max, double damping) {
  const arma::uword K = ch.K;
  const arma::cx_mat W_target =
      update_w(ch, b, theta_b, gamma, eta, cross, W_prev, weights);

  arma::cx_mat Hhat(ch.N_t, K);
  for (arma::uword j = 0; j < K; ++j)
    Hhat.col(j) = composite_channel(ch.h(b, j), ch.G_stack(b), ch.v_stack(j),
                                    theta_b);
  const arma::cx_mat Res = cross.total() - Hhat.t() * W_prev;

  auto surrogate = [&](const arma::cx_mat& W) {
    const arma::cx_mat A = Res + Hhat.t() * W;
    double val = 0.0;
    for (arma::uword k = 0; k < K; ++k) {
      double den = 0.0;
      for (arma::uword j = 0; j < K; ++j) den += std::norm(A(k, j));
      const double c = std::sqrt((1.0 + gamma[k]) * weights[k]);
      val += std::norm(eta[k]) * den - 2.0 * c * std::real(eta[k] * A(k, k));
    }
    return val;
  };

  // Backtracking acceptance: the unconstrained minimizer can overshoot the
  // power ball, and renormalizing the full step sometimes worsens the
  // surrogate. Damping toward the previous feasible point restores descent;
  // when no damped step helps, the previous precoder is kept.
  const double base = surrogate(W_prev);
  for (double t = damping; t >= 1.0 / 64.0; t *= 0.5) {
    arma::cx_mat W_try = W_prev + t * (W_target - W_prev);
    if (!normalize_power(W_try, p_max)) break;
    if (surrogate(W_try) < base) return W_try;
  }
  return W_prev;
}

}  // namespace cellfree
