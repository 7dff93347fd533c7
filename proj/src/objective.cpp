#include "cellfree/objective.hpp"

#include <cmath>
#include <stdexcept>

namespace cellfree {

namespace {
constexpr double kLn2 = 0.69314718055994530942;
}

CrossTermTable global_cross_table(const ChannelSet& ch, const PrecoderSet& W,
                                  const arma::cx_vec& theta) {
  if (W.n_elem != ch.B)
    throw std::invalid_argument("global_cross_table: need one precoder per BS");
  CrossTermTable t(ch.K);
  for (arma::uword b = 0; b < ch.B; ++b) {
    if (W(b).n_rows != ch.N_t || W(b).n_cols != ch.K)
      throw std::invalid_argument("global_cross_table: precoder shape mismatch");
    for (arma::uword k = 0; k < ch.K; ++k) {
      // Row k of both tables for this BS in one go:
      // varpi_k. += h_{b,k}^H W_b, vartheta_k. += (v_k* . theta)^H G_b W_b.
      const arma::cx_rowvec direct = ch.h(b, k).t() * W(b);
      const arma::cx_rowvec reflect =
          (ch.v_stack(k) % theta).t() * ch.G_stack(b) * W(b);
      t.varpi.row(k) += direct;
      t.vartheta.row(k) += reflect;
    }
  }
  return t;
}

double sinr_from_table(const arma::cx_mat& A, arma::uword k, double noise) {
  if (noise <= 0.0) throw std::invalid_argument("sinr: noise power must be > 0");
  const arma::uword K = A.n_rows;
  double interf = 0.0;
  for (arma::uword j = 0; j < K; ++j)
    if (j != k) interf += std::norm(A(k, j));
  return std::norm(A(k, k)) / (interf + noise);
}

double sinr(const ChannelSet& ch, const PrecoderSet& W,
            const arma::cx_vec& theta, arma::uword k, double noise) {
  return sinr_from_table(global_cross_table(ch, W, theta).total(), k, noise);
}

double wsr_from_table(const arma::cx_mat& A, const arma::vec& weights,
                      double noise) {
  double sum = 0.0;
  for (arma::uword k = 0; k < A.n_rows; ++k)
    sum += weights[k] * std::log2(1.0 + sinr_from_table(A, k, noise));
  return sum;
}

double wsr(const ChannelSet& ch, const PrecoderSet& W,
           const arma::cx_vec& theta, const arma::vec& weights, double noise) {
  return wsr_from_table(global_cross_table(ch, W, theta).total(), weights,
                        noise);
}

double f1_from_table(const arma::cx_mat& A, const arma::vec& gamma,
                     const arma::vec& weights, double noise) {
  if (noise <= 0.0) throw std::invalid_argument("f1: noise power must be > 0");
  const arma::uword K = A.n_rows;
  double sum = 0.0;
  for (arma::uword k = 0; k < K; ++k) {
    double den = noise;
    for (arma::uword j = 0; j < K; ++j) den += std::norm(A(k, j));
    const double q = std::norm(A(k, k));
    const double g = gamma[k];
    sum += weights[k] *
           ((g - (1.0 + g) * q / den) / kLn2 - std::log2(1.0 + g));
  }
  return sum;
}

double f1(const ChannelSet& ch, const PrecoderSet& W, const arma::cx_vec& theta,
          const arma::vec& gamma, const arma::vec& weights, double noise) {
  return f1_from_table(global_cross_table(ch, W, theta).total(), gamma,
                       weights, noise);
}

double f2_from_table(const arma::cx_mat& A, const arma::vec& gamma,
                     const arma::cx_vec& eta, const arma::vec& weights,
                     double noise) {
  if (noise <= 0.0) throw std::invalid_argument("f2: noise power must be > 0");
  const arma::uword K = A.n_rows;
  double sum = 0.0;
  for (arma::uword k = 0; k < K; ++k) {
    double den = noise;
    for (arma::uword j = 0; j < K; ++j) den += std::norm(A(k, j));
    const double g = gamma[k];
    const double c = std::sqrt((1.0 + g) * weights[k]);
    const double quad = std::norm(eta[k]) * den -
                        2.0 * c * std::real(eta[k] * A(k, k)) +
                        weights[k] * g;
    sum += quad / kLn2 - weights[k] * std::log2(1.0 + g);
  }
  return sum;
}

double f2(const ChannelSet& ch, const PrecoderSet& W, const arma::cx_vec& theta,
          const arma::vec& gamma, const arma::cx_vec& eta,
          const arma::vec& weights, double noise) {
  return f2_from_table(global_cross_table(ch, W, theta).total(), gamma, eta,
                       weights, noise);
}

double consensus_error(const std::vector<arma::cx_vec>& theta_by_bs) {
  const std::size_t B = theta_by_bs.size();
  if (B == 0) throw std::invalid_argument("consensus_error: empty input");
  double sum = 0.0;
  for (std::size_t b = 0; b < B; ++b) {
    const arma::cx_vec d = theta_by_bs[b] - theta_by_bs[(b + 1) % B];
    sum += std::pow(arma::norm(d, 2), 2);
  }
  return sum;
}

double loss(double consensus_err, double wsr_value) {
  return consensus_err - wsr_value;
}

double loss_batch(const arma::vec& consensus_errs, const arma::vec& wsr_values) {
  if (consensus_errs.n_elem != wsr_values.n_elem || consensus_errs.n_elem == 0)
    throw std::invalid_argument("loss_batch: size mismatch or empty batch");
  return arma::mean(consensus_errs - wsr_values);
}

}  // namespace cellfree
