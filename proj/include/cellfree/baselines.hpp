#ifndef CELLFREE_BASELINES_HPP
#define CELLFREE_BASELINES_HPP

#include <armadillo>

#include "cellfree/objective.hpp"

namespace cellfree {

struct BaselineOutput {
  PrecoderSet W;        // one N_t x K precoder per BS, power-feasible
  arma::cx_vec theta;   // NR, unit-modulus
  arma::uword iterations = 0;
  arma::vec wsr_trace;  // per-iteration WSR where the method iterates
};

// Random phases, per-BS conjugate beamforming on the composite local channel
// with equal per-UE power split.
BaselineOutput mrt_random(const ChannelSet& ch, const SystemConfig& cfg);

// Phase vector from element-wise coordinate ascent on the summed cascaded
// channel gain sum_{b,k} ||hhat_{b,k}(theta)||^2, then MRT precoding.
BaselineOutput mrt_maxao(const ChannelSet& ch, const SystemConfig& cfg);

// Same phase design; per-BS zero-forcing precoder on the composite channels,
// exact for K <= N_t and regularized with sigma = noise*K/p_max otherwise.
BaselineOutput local_zf_maxao(const ChannelSet& ch, const SystemConfig& cfg);

// Full-CSI alternating optimization at a single node: closed-form gamma/eta,
// sequential per-BS precoder updates with exact cross-terms, and one global
// phase vector from the exact joint quadratic (no consensus term). Stops on
// relative WSR change < tol or after max_iters.
BaselineOutput centralized_fp(const ChannelSet& ch, const SystemConfig& cfg,
                              arma::uword max_iters = 0, double tol = 0.0);

}  // namespace cellfree

#endif  // CELLFREE_BASELINES_HPP
