#ifndef CELLFREE_OBJECTIVE_HPP
#define CELLFREE_OBJECTIVE_HPP

#include <armadillo>
#include <vector>

#include "cellfree/channel.hpp"

namespace cellfree {

// Per-BS precoders, one N_t x K matrix per BS (column k serves UE k).
using PrecoderSet = arma::field<arma::cx_mat>;

// Cross-term information: varpi(k,j) = sum_b h_{b,k}^H w_{b,j} (direct part)
// and vartheta(k,j) = sum_b theta^H V_k^H G_b w_{b,j} (reflected part).
// Row index k is the receiving UE, column index j the transmitted stream.
struct CrossTermTable {
  arma::cx_mat varpi;
  arma::cx_mat vartheta;

  CrossTermTable() = default;
  explicit CrossTermTable(arma::uword K)
      : varpi(K, K, arma::fill::zeros), vartheta(K, K, arma::fill::zeros) {}

  arma::cx_mat total() const { return varpi + vartheta; }
  arma::uword K() const { return varpi.n_rows; }

  CrossTermTable& operator+=(const CrossTermTable& o) {
    varpi += o.varpi;
    vartheta += o.vartheta;
    return *this;
  }
  CrossTermTable& operator-=(const CrossTermTable& o) {
    varpi -= o.varpi;
    vartheta -= o.vartheta;
    return *this;
  }
};

struct AuxVars {
  arma::vec gamma;    // K, nonnegative
  arma::cx_vec eta;   // K
};

// Exact global cross-term table for a given (W, theta).
CrossTermTable global_cross_table(const ChannelSet& ch, const PrecoderSet& W,
                                  const arma::cx_vec& theta);

// SINR of UE k from an effective-channel table A(k,j) = varpi + vartheta.
double sinr_from_table(const arma::cx_mat& A, arma::uword k, double noise);

double sinr(const ChannelSet& ch, const PrecoderSet& W,
            const arma::cx_vec& theta, arma::uword k, double noise);

// Weighted sum rate, bits/s/Hz: sum_k w_k log2(1 + sinr_k).
double wsr_from_table(const arma::cx_mat& A, const arma::vec& weights,
                      double noise);
double wsr(const ChannelSet& ch, const PrecoderSet& W,
           const arma::cx_vec& theta, const arma::vec& weights, double noise);

// Lagrangian-dual surrogate. Rates are kept in bits, so the affine-in-gamma
// part carries a 1/ln2 factor; this is the unique scaling under which the
// closed-form gamma is the exact minimizer of f1 over gamma and
// f1(gamma*) = -wsr holds simultaneously.
double f1_from_table(const arma::cx_mat& A, const arma::vec& gamma,
                     const arma::vec& weights, double noise);
double f1(const ChannelSet& ch, const PrecoderSet& W, const arma::cx_vec& theta,
          const arma::vec& gamma, const arma::vec& weights, double noise);

// Quadratic-transform surrogate, same bit-rate scaling: f2(eta*) = f1
// identically, and the closed-form eta is stationary.
double f2_from_table(const arma::cx_mat& A, const arma::vec& gamma,
                     const arma::cx_vec& eta, const arma::vec& weights,
                     double noise);
double f2(const ChannelSet& ch, const PrecoderSet& W, const arma::cx_vec& theta,
          const arma::vec& gamma, const arma::cx_vec& eta,
          const arma::vec& weights, double noise);

// Ring-consensus error sum_b ||theta_b - theta_{b+1 mod B}||^2.
double consensus_error(const std::vector<arma::cx_vec>& theta_by_bs);

// Training-style loss for one sample, consensus error minus WSR.
double loss(double consensus_err, double wsr_value);

// Batch mean over per-sample losses.
double loss_batch(const arma::vec& consensus_errs, const arma::vec& wsr_values);

}  // namespace cellfree

#endif  // CELLFREE_OBJECTIVE_HPP
