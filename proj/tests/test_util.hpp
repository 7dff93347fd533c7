#ifndef CELLFREE_TEST_UTIL_HPP
#define CELLFREE_TEST_UTIL_HPP

#include <armadillo>

#include "cellfree/channel.hpp"
#include "cellfree/scenario.hpp"

namespace cftest {

inline cellfree::SystemConfig small_config(arma::uword B, arma::uword R,
                                           arma::uword K, arma::uword N,
                                           arma::uword N_t,
                                           std::uint64_t seed) {
  cellfree::SystemConfig cfg;
  cfg.B = B;
  cfg.R = R;
  cfg.K = K;
  cfg.N = N;
  cfg.N_t = N_t;
  cfg.L = B + 2;
  cfg.seed = seed;
  cfg.validate_and_finalize();
  return cfg;
}

inline cellfree::ChannelSet channels_for(const cellfree::SystemConfig& cfg) {
  return cellfree::make_channels(cfg, cellfree::build_scenario(cfg));
}

inline double max_abs(const arma::cx_mat& m) {
  return m.n_elem == 0 ? 0.0 : arma::abs(m).max();
}

}  // namespace cftest

#endif
