#include "cellfree/theta_solver.hpp"

#include <cmath>
#include <stdexcept>

namespace cellfree {

namespace {
constexpr double kLn2 = 0.69314718055994530942;

// u(k,j) = V_k^H G_b w_{b,j}; rows of V_k^H G_b are conj(v_k)-scaled rows.
arma::field<arma::cx_vec> reflected_terms(const ChannelSet& ch, arma::uword b,
                                          const arma::cx_mat& W_b) {
  const arma::uword K = ch.K;
  arma::field<arma::cx_vec> u(K, K);
  const arma::cx_mat GW = ch.G_stack(b) * W_b;  // NR x K
  for (arma::uword k = 0; k < K; ++k) {
    const arma::cx_vec vk = arma::conj(ch.v_stack(k));
    for (arma::uword j = 0; j < K; ++j) u(k, j) = vk % GW.col(j);
  }
  return u;
}
}  // namespace

ThetaQuadratic assemble_theta_quadratic(
    const arma::field<arma::cx_vec>& u, const arma::cx_mat& t,
    const arma::vec& gamma, const arma::cx_vec& eta, const arma::vec& weights,
    double rho, const arma::cx_vec& lambda, const arma::cx_vec& theta_ref) {
  const arma::uword K = t.n_rows;
  if (u.n_rows != K || u.n_cols != K)
    throw std::invalid_argument("assemble_theta_quadratic: table shape mismatch");
  const arma::uword NR = u(0, 0).n_elem;

  ThetaQuadratic q;
  q.S.zeros(NR, NR);
  q.Z.zeros(NR);

  for (arma::uword k = 0; k < K; ++k) {
    const double e2 = std::norm(eta[k]);
    const double c = std::sqrt((1.0 + gamma[k]) * weights[k]);
    for (arma::uword j = 0; j < K; ++j) {
      q.S += (e2 / kLn2) * (u(k, j) * u(k, j).t());
      q.Z -= (e2 / kLn2) * u(k, j) * std::conj(t(k, j));
    }
    q.Z += (c / kLn2) * eta[k] * u(k, k);
  }

  if (rho > 0.0) {
    q.S.diag() += rho / 2.0;
    q.Z += (rho / 2.0) * (theta_ref - lambda / rho);
  }
  return q;
}

arma::cx_mat assemble_S(const ChannelSet& ch, arma::uword b,
                        const arma::cx_mat& W_b, const arma::cx_vec& eta,
                        double rho_b) {
  if (W_b.n_rows != ch.N_t || W_b.n_cols != ch.K)
    throw std::invalid_argument("assemble_S: precoder shape mismatch");
  const auto u = reflected_terms(ch, b, W_b);
  arma::cx_mat S(ch.nr(), ch.nr(), arma::fill::zeros);
  for (arma::uword k = 0; k < ch.K; ++k) {
    const double e2 = std::norm(eta[k]);
    for (arma::uword j = 0; j < ch.K; ++j)
      S += (e2 / kLn2) * (u(k, j) * u(k, j).t());
  }
  S.diag() += rho_b / 2.0;
  return S;
}

arma::cx_vec assemble_Z(const ChannelSet& ch, arma::uword b,
                        const arma::cx_mat& W_b, const arma::cx_vec& eta,
                        const arma::vec& gamma, const arma::vec& weights,
                        const CrossTermTable& others,
                        const arma::cx_vec& lambda_b, double rho_b,
                        const arma::cx_vec& theta_ref) {
  if (W_b.n_rows != ch.N_t || W_b.n_cols != ch.K)
    throw std::invalid_argument("assemble_Z: precoder shape mismatch");
  const auto u = reflected_terms(ch, b, W_b);

  // Theta-independent part of A(k,j): everyone else plus this BS's fresh
  // direct-path product.
  arma::cx_mat t = others.total();
  for (arma::uword k = 0; k < ch.K; ++k)
    t.row(k) += ch.h(b, k).t() * W_b;

  arma::cx_vec Z(ch.nr(), arma::fill::zeros);
  for (arma::uword k = 0; k < ch.K; ++k) {
    const double e2 = std::norm(eta[k]);
    const double c = std::sqrt((1.0 + gamma[k]) * weights[k]);
    for (arma::uword j = 0; j < ch.K; ++j)
      Z -= (e2 / kLn2) * u(k, j) * std::conj(t(k, j));
    Z += (c / kLn2) * eta[k] * u(k, k);
  }
  if (rho_b > 0.0) Z += (rho_b / 2.0) * (theta_ref - lambda_b / rho_b);
  return Z;
}

double theta_objective(const ThetaQuadratic& q, const arma::cx_vec& theta) {
  const cx quad = arma::as_scalar(theta.t() * q.S * theta);
  return std::real(quad) - 2.0 * std::real(arma::cdot(theta, q.Z));
}

arma::cx_vec solve_theta_bcd(const ThetaQuadratic& q,
                             const arma::cx_vec& theta_init,
                             arma::uword max_sweeps, double tol) {
  const arma::uword NR = q.Z.n_elem;
  if (q.S.n_rows != NR || q.S.n_cols != NR)
    throw std::invalid_argument("solve_theta_bcd: S/Z shape mismatch");
  if (!q.S.is_finite() || !q.Z.is_finite())
    throw std::invalid_argument("solve_theta_bcd: non-finite quadratic");
  if (theta_init.n_elem != NR)
    throw std::invalid_argument("solve_theta_bcd: init size mismatch");

  arma::cx_vec theta = theta_init;
  double prev = theta_objective(q, theta);
  const double scale = std::abs(prev) + arma::norm(q.Z, 2) + 1.0;

  for (arma::uword sweep = 0; sweep < max_sweeps; ++sweep) {
    for (arma::uword n = 0; n < NR; ++n) {
      // Z_n minus the off-diagonal coupling; diagonal contributes a constant.
      cx g = q.Z[n];
      for (arma::uword m = 0; m < NR; ++m)
        if (m != n) g -= q.S(n, m) * theta[m];
      if (g == cx(0.0, 0.0)) continue;  // tie-break: keep previous phase
      theta[n] = std::polar(1.0, std::arg(g));
    }
    const double cur = theta_objective(q, theta);
    if (cur > prev + 1e-12 * scale)
      throw std::logic_error("solve_theta_bcd: sweep increased the objective");
    const double rel = std::abs(prev - cur) / std::max(std::abs(prev), 1e-30);
    prev = cur;
    if (rel < tol) break;
  }
  return theta;
}

}  // namespace cellfree
