#ifndef CELLFREE_SCENARIO_HPP
#define CELLFREE_SCENARIO_HPP

#include <armadillo>
#include <cstdint>
#include <string>

namespace cellfree {

enum class LinkKind { BsRis, RisUe, BsUe };

// Log-distance path loss: PL(d) = g0 * (d / d0)^(-alpha), linear power gain.
struct PathLossParams {
  double g0 = 1e-3;  // reference gain at d0
  double d0 = 1.0;   // reference distance [m]
  double alpha = 2.0;
};

struct PathLossConfig {
  PathLossParams bs_ris{1e-3, 1.0, 2.0};
  PathLossParams ris_ue{1e-3, 1.0, 2.8};
  PathLossParams bs_ue{1e-3, 1.0, 2.8};

  const PathLossParams& of(LinkKind kind) const {
    switch (kind) {
      case LinkKind::BsRis: return bs_ris;
      case LinkKind::RisUe: return ris_ue;
      default: return bs_ue;
    }
  }
};

// Full run configuration. Powers are stored linear (watts); the harness
// converts from dBm at the interface.
struct SystemConfig {
  arma::uword B = 4;    // base stations
  arma::uword R = 2;    // RIS panels
  arma::uword K = 4;    // single-antenna users
  arma::uword N = 16;   // elements per RIS
  arma::uword N_t = 2;  // antennas per BS
  arma::uword L = 6;    // unrolled blocks, must be >= B

  arma::vec p_max;        // per-BS transmit power budget [W]
  double noise_power = 1e-11;  // delta^2 [W]
  arma::vec weights;      // omega_k, one per UE
  arma::vec rho;          // per-BS consensus penalty

  std::uint64_t seed = 1;

  arma::uword paths_per_channel = 3;  // 1 LoS + rest NLoS
  PathLossConfig pathloss;

  // Inner solver knobs. The W-layer backtracking starts at w_damping; the
  // full closed-form step oscillates when all BSs update simultaneously, and
  // 0.35 was the strongest stable choice measured at the nominal deployment.
  double w_damping = 0.35;
  arma::uword bcd_max_sweeps = 50;
  double bcd_tol = 1e-8;
  arma::uword centralized_max_iters = 200;
  double centralized_tol = 1e-6;
  arma::uword tune_batch = 8;

  // Fills p_max/weights/rho with defaults for any empty field and checks all
  // invariants; throws std::invalid_argument on violation.
  void validate_and_finalize();

  arma::uword nr() const { return N * R; }
};

// Deployment geometry, fully determined by the config (and its seed).
struct Scenario {
  arma::mat bs_positions;   // B x 3 [m]
  arma::mat ris_positions;  // R x 3 [m]
  arma::mat ue_positions;   // K x 3 [m]
  PathLossConfig pathloss;
};

// BS b sits at (200*(b+1)/B, -50, 3) m for b = 0..B-1. RIS positions are
// (75,10,6) and (125,10,6) for R = 2, the midpoint for R = 1, and evenly
// spaced on that segment (endpoints included) otherwise. UEs are uniform in
// the disc of radius 5 m centred at (75, 0), height 1.5 m.
Scenario build_scenario(const SystemConfig& config);

// Linear power gain for one link; throws on non-positive distance.
double path_loss(double distance_m, LinkKind kind, const PathLossConfig& pl);

double distance(const arma::rowvec& a, const arma::rowvec& b);

}  // namespace cellfree

#endif  // CELLFREE_SCENARIO_HPP
