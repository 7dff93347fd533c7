#ifndef CELLFREE_CHANNEL_HPP
#define CELLFREE_CHANNEL_HPP

#include <armadillo>
#include <iosfwd>
#include <vector>

#include "cellfree/scenario.hpp"

namespace cellfree {

using cx = std::complex<double>;

// One propagation path: complex gain plus azimuth/elevation AoA and azimuth
// AoD, all in radians within [-pi/2, pi/2].
struct PathParams {
  cx beta;
  double psi = 0.0;    // azimuth AoA
  double sigma = 0.0;  // elevation AoA
  double chi = 0.0;    // azimuth AoD
};

enum class ChannelKind { G, v, h };

// ULA response, entry n = exp(j*pi*n*sin(psi)) / sqrt(N_L).
arma::cx_vec ula_response(double psi, arma::uword n_l);

// UPA response, entry (n_x, n_y) = exp(j*pi*(n_x sin(psi) sin(sigma) +
// n_y cos(sigma))) / sqrt(N_x N_y). Enumeration is row-major with n_x fast
// and n_y slow; this ordering is a fixed artifact convention.
arma::cx_vec upa_response(double psi, double sigma, arma::uword n_x,
                          arma::uword n_y);

// RIS aspect ratio N = N_x * N_y: N_x is the smallest divisor of N that is
// >= sqrt(N) (so N_x >= N_y). The source model never states the geometry,
// hence a fixed declared convention.
struct UpaGrid {
  arma::uword n_x;
  arma::uword n_y;
};
UpaGrid upa_grid(arma::uword n);

// Multipath Saleh-Valenzuela draw.
//   G: N x N_t   (UPA receive x ULA transmit outer products)
//   v: N x 1     (UPA)
//   h: N_t x 1   (ULA)
// Each term is beta_l times the steering structure, with the
// sqrt(dim_product / path_count) prefactor; `scale` multiplies the result.
arma::cx_mat draw_sv_channel(ChannelKind kind, arma::uword n_rows,
                             arma::uword n_cols,
                             const std::vector<PathParams>& paths,
                             double scale = 1.0);

// All channel realizations of one scenario draw.
struct ChannelSet {
  arma::uword B = 0, R = 0, K = 0, N = 0, N_t = 0;
  arma::field<arma::cx_mat> G;      // (b,r) -> N x N_t
  arma::field<arma::cx_vec> v;      // (r,k) -> N
  arma::field<arma::cx_vec> h;      // (b,k) -> N_t
  arma::field<arma::cx_mat> G_stack;  // b -> NR x N_t, RIS blocks stacked
  arma::field<arma::cx_vec> v_stack;  // k -> NR, diagonal of V_k

  arma::uword nr() const { return N * R; }
};

// Draws every G/v/h for the scenario; pure function of (config.seed, scenario).
ChannelSet make_channels(const SystemConfig& config, const Scenario& scenario);

// Composite channel h_hat with h_hat^H = h^H + theta^H V_k^H G_b.
// v_stack_k is the NR-vector diagonal of V_k. Throws if theta is not
// unit-modulus within 1e-9 or on dimension mismatch.
arma::cx_vec composite_channel(const arma::cx_vec& h_bk,
                               const arma::cx_mat& G_b,
                               const arma::cx_vec& v_stack_k,
                               const arma::cx_vec& theta);

// CSV dump of every channel entry for cross-implementation regression.
void dump_channels_csv(const ChannelSet& ch, std::ostream& out);

}  // namespace cellfree

#endif  // CELLFREE_CHANNEL_HPP
