#ifndef CELLFREE_FP_UPDATES_HPP
#define CELLFREE_FP_UPDATES_HPP

#include <armadillo>

#include "cellfree/objective.hpp"

namespace cellfree {

// gamma_k = |A_kk|^2 / (sum_{j != k} |A_kj|^2 + noise) with A = varpi + vartheta.
arma::vec update_gamma(const CrossTermTable& cross, double noise);

// eta_k = conj(A_kk) sqrt((1+gamma_k) w_k) / (sum_j |A_kj|^2 + noise).
arma::cx_vec update_eta(const CrossTermTable& cross, const arma::vec& gamma,
                        const arma::vec& weights, double noise);

// A-Layer: both auxiliary variables in one pass.
AuxVars update_aux(const CrossTermTable& cross, const arma::vec& weights,
                   double noise);

// Closed-form precoder update for one BS (unnormalized):
//   w_k = M^{-1} (sqrt((1+gamma_k) w_k) conj(eta_k) hhat_k - Omega_k)
//   M = sum_j |eta_j|^2 hhat_j hhat_j^H + eps I
//   Omega_k = sum_j |eta_j|^2 hhat_j (A_jk - hhat_j^H w_prev_k)
// where hhat_j is the composite channel under theta_b and A the cross-term
// table whose own-BS contribution was formed with (theta_b, W_prev). The
// Tikhonov eps is 1e-12 of the mean diagonal, guarding K < N_t.
arma::cx_mat update_w(const ChannelSet& ch, arma::uword b,
                      const arma::cx_vec& theta_b, const arma::vec& gamma,
                      const arma::cx_vec& eta, const CrossTermTable& cross,
                      const arma::cx_mat& W_prev, const arma::vec& weights);

// Scales all columns so total power equals p_max exactly. Returns false and
// leaves W untouched when the input power is zero.
bool normalize_power(arma::cx_mat& W_b, double p_max);

// Full W-Layer: closed-form update, power normalization, and a monotone
// acceptance test. The normalized precoder is kept only when it does not
// worsen the local quadratic surrogate (cross terms fixed); otherwise the
// previous feasible precoder is returned. The mu-free normalized update can
// overshoot at low noise, and the acceptance test is what makes per-iteration
// surrogate descent (hence WSR ascent with exact cross terms) hold.
arma::cx_mat w_layer_step(const ChannelSet& ch, arma::uword b,
                          const arma::cx_vec& theta_b, const arma::vec& gamma,
                          const arma::cx_vec& eta, const CrossTermTable& cross,
                          const arma::cx_mat& W_prev, const arma::vec& weights,
                          double p_max, double damping = 1.0);

}  // namespace cellfree

#endif  // CELLFREE_FP_UPDATES_HPP
