#ifndef CELLFREE_SELFCHECK_HPP
#define CELLFREE_SELFCHECK_HPP

#include <armadillo>
#include <cstdint>
#include <string>
#include <vector>

#include "cellfree/channel.hpp"
#include "cellfree/objective.hpp"
#include "cellfree/theta_solver.hpp"

namespace cellfree {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Deterministic random instance helpers shared by the property suites.
arma::cx_vec random_unit_theta(arma::uword n, std::uint64_t seed,
                               std::uint64_t stream);
PrecoderSet random_feasible_precoders(const ChannelSet& ch, double p_max,
                                      std::uint64_t seed, std::uint64_t stream);
CrossTermTable random_cross_table(arma::uword K, std::uint64_t seed,
                                  std::uint64_t stream);
ThetaQuadratic random_theta_quadratic(arma::uword nr, std::uint64_t seed,
                                      std::uint64_t stream);

// Golden-section minimizer of f1 over gamma_k with the other entries fixed.
double golden_section_gamma(const arma::cx_mat& A, const arma::vec& gamma,
                            const arma::vec& weights, double noise,
                            arma::uword k, double hi);

// f1(gamma*) = -WSR and f2(eta*) = f1 on seeded random instances with
// B in {1,2,4}, K in {1,2,4}, N = 8, R = 1, both within 1e-9 relative.
CheckResult check_transform_tightness(int instances, std::uint64_t seed);

// update_gamma vs the golden-section oracle (1e-6) and finite-difference
// stationarity of f2 at eta* and of the local precoding objective at w*.
CheckResult check_closed_form_optimality(int instances, std::uint64_t seed);

// BCD objective within 1e-3 of an exhaustive phase-grid minimum on NR = 2
// quadratics; sweeps checked monotone by the solver itself.
CheckResult check_theta_bcd_vs_grid(int instances, std::uint64_t seed,
                                    arma::uword grid_points);

// Cross-term integrality after B hops, replacement correctness at every
// I2/I3 step (entrywise 1e-10 via a replay oracle), and exact message
// accounting against B(L-1)(2K^2+RN).
CheckResult check_exchange_exactness(const std::vector<arma::uword>& bs_counts,
                                     std::uint64_t seed);

// Sequential and threaded runs bit-identical, repeated runs bit-identical.
CheckResult check_run_determinism(std::uint64_t seed);

}  // namespace cellfree

#endif  // CELLFREE_SELFCHECK_HPP
