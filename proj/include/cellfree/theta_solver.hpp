#ifndef CELLFREE_THETA_SOLVER_HPP
#define CELLFREE_THETA_SOLVER_HPP

#include <armadillo>

#include "cellfree/objective.hpp"

namespace cellfree {

// Quadratic form of the per-BS phase subproblem:
//   L(theta) = theta^H S theta - 2 Re{theta^H Z} + const.
// Quadratics assembled from the ADMM data term are Hermitian PSD (the data
// part is a sum of outer products plus (rho/2) I).
struct ThetaQuadratic {
  arma::cx_mat S;
  arma::cx_vec Z;
};

// Generic assembly from the effective-term decomposition
//   A(k,j)(theta) = t(k,j) + theta^H u(k,j):
//   S = (1/ln2) sum_k |eta_k|^2 sum_j u_kj u_kj^H + (rho/2) I
//   Z = (1/ln2) [sum_k c_k eta_k u_kk - sum_k |eta_k|^2 sum_j u_kj conj(t_kj)]
//       + (rho/2)(theta_ref - lambda/rho)
// with c_k = sqrt((1+gamma_k) w_k). With rho = 0 the consensus part vanishes
// (lambda and theta_ref may be empty).
ThetaQuadratic assemble_theta_quadratic(
    const arma::field<arma::cx_vec>& u,  // K x K, each NR
    const arma::cx_mat& t,               // K x K theta-independent terms
    const arma::vec& gamma, const arma::cx_vec& eta, const arma::vec& weights,
    double rho, const arma::cx_vec& lambda, const arma::cx_vec& theta_ref);

// Data-term matrix for BS b with its current precoder, plus (rho_b/2) I.
arma::cx_mat assemble_S(const ChannelSet& ch, arma::uword b,
                        const arma::cx_mat& W_b, const arma::cx_vec& eta,
                        double rho_b);

// Linear term for BS b. `others` holds the cross-term contributions of all
// other BSs only (the caller removes its own stale contribution from the
// table it uses); the consensus pull (rho_b/2)(theta_ref - lambda/rho) is
// folded in so the quadratic matches the local augmented Lagrangian up to a
// theta-independent constant.
arma::cx_vec assemble_Z(const ChannelSet& ch, arma::uword b,
                        const arma::cx_mat& W_b, const arma::cx_vec& eta,
                        const arma::vec& gamma, const arma::vec& weights,
                        const CrossTermTable& others,
                        const arma::cx_vec& lambda_b, double rho_b,
                        const arma::cx_vec& theta_ref);

double theta_objective(const ThetaQuadratic& q, const arma::cx_vec& theta);

// Element-wise block-coordinate descent over unit-modulus entries:
//   theta_n <- exp(j arg(Z_n - sum_{m != n} S_nm theta_m)),
// keeping the previous entry when the argument is exactly zero. Sweeps stop
// on relative objective decrease < tol or after max_sweeps. Every sweep is
// non-increasing (checked); output entries are exact phases.
arma::cx_vec solve_theta_bcd(const ThetaQuadratic& q,
                             const arma::cx_vec& theta_init,
                             arma::uword max_sweeps = 50, double tol = 1e-8);

}  // namespace cellfree

#endif  // CELLFREE_THETA_SOLVER_HPP
