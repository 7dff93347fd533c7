#include "cellfree/scenario.hpp"

#include <cmath>
#include <stdexcept>

#include "cellfree/rng.hpp"

namespace cellfree {

void SystemConfig::validate_and_finalize() {
  if (B < 1 || R < 1 || K < 1 || N < 1 || N_t < 1)
    throw std::invalid_argument("all dimension fields must be >= 1");
  if (L == 0) L = B + 2;  // unset: default block count
  if (L < B)
    throw std::invalid_argument("block count L must satisfy L >= B");
  if (paths_per_channel < 1)
    throw std::invalid_argument("paths_per_channel must be >= 1");

  if (p_max.n_elem == 0) p_max = arma::vec(B, arma::fill::ones);
  if (p_max.n_elem == 1 && B > 1) p_max = arma::vec(B, arma::fill::value(p_max[0]));
  if (p_max.n_elem != B)
    throw std::invalid_argument("p_max must have one entry per BS");
  if (arma::any(p_max <= 0.0))
    throw std::invalid_argument("p_max entries must be positive");

  if (noise_power <= 0.0)
    throw std::invalid_argument("noise_power must be positive");

  if (weights.n_elem == 0) weights = arma::vec(K, arma::fill::ones);
  if (weights.n_elem != K)
    throw std::invalid_argument("weights must have one entry per UE");
  if (arma::any(weights <= 0.0))
    throw std::invalid_argument("weights must be positive");

  if (rho.n_elem == 0) rho = arma::vec(B, arma::fill::ones);
  if (rho.n_elem == 1 && B > 1) rho = arma::vec(B, arma::fill::value(rho[0]));
  if (rho.n_elem != B)
    throw std::invalid_argument("rho must have one entry per BS");
  if (arma::any(rho <= 0.0))
    throw std::invalid_argument("rho entries must be positive");

  for (const auto* p : {&pathloss.bs_ris, &pathloss.ris_ue, &pathloss.bs_ue}) {
    if (p->g0 <= 0.0 || p->d0 <= 0.0)
      throw std::invalid_argument("path loss g0 and d0 must be positive");
  }
}

double distance(const arma::rowvec& a, const arma::rowvec& b) {
  return arma::norm(a - b, 2);
}

double path_loss(double distance_m, LinkKind kind, const PathLossConfig& pl) {
  if (!(distance_m > 0.0))
    throw std::invalid_argument("path_loss: distance must be positive");
  const PathLossParams& p = pl.of(kind);
  return p.g0 * std::pow(distance_m / p.d0, -p.alpha);
}

Scenario build_scenario(const SystemConfig& config) {
  SystemConfig cfg = config;
  cfg.validate_and_finalize();

  Scenario sc;
  sc.pathloss = cfg.pathloss;

  sc.bs_positions.set_size(cfg.B, 3);
  for (arma::uword b = 0; b < cfg.B; ++b) {
    const double x = 200.0 * static_cast<double>(b + 1) / static_cast<double>(cfg.B);
    sc.bs_positions.row(b) = arma::rowvec{x, -50.0, 3.0};
  }

  const arma::rowvec ris_a{75.0, 10.0, 6.0};
  const arma::rowvec ris_b{125.0, 10.0, 6.0};
  sc.ris_positions.set_size(cfg.R, 3);
  if (cfg.R == 1) {
    sc.ris_positions.row(0) = 0.5 * (ris_a + ris_b);
  } else {
    // Endpoints included, so R = 2 recovers the nominal two-RIS layout.
    for (arma::uword r = 0; r < cfg.R; ++r) {
      const double t = static_cast<double>(r) / static_cast<double>(cfg.R - 1);
      sc.ris_positions.row(r) = (1.0 - t) * ris_a + t * ris_b;
    }
  }

  const double ue_cx = 75.0, ue_cy = 0.0, ue_radius = 5.0, ue_z = 1.5;
  sc.ue_positions.set_size(cfg.K, 3);
  for (arma::uword k = 0; k < cfg.K; ++k) {
    RngStream rng(cfg.seed, DrawKind::UePosition, k);
    const double rad = ue_radius * std::sqrt(rng.uniform01());
    const double ang = rng.uniform(0.0, 2.0 * arma::datum::pi);
    sc.ue_positions.row(k) =
        arma::rowvec{ue_cx + rad * std::cos(ang), ue_cy + rad * std::sin(ang), ue_z};
  }

  return sc;
}

}  // namespace cellfree
