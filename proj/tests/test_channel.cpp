#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cellfree/channel.hpp"
#include "cellfree/rng.hpp"
#include "cellfree/selfcheck.hpp"
#include "test_util.hpp"

using namespace cellfree;

TEST_CASE("ULA response basics") {
  const arma::cx_vec a = ula_response(0.0, 4);
  for (arma::uword n = 0; n < 4; ++n)
    CHECK(std::abs(a[n] - cx(0.5, 0.0)) < 1e-15);

  const arma::cx_vec one = ula_response(0.7, 1);
  CHECK(std::abs(one[0] - cx(1.0, 0.0)) < 1e-15);

  CHECK_THROWS_AS(ula_response(0.1, 0), std::invalid_argument);
}

TEST_CASE("steering vectors are unit-norm") {
  RngStream rng(3, DrawKind::Test);
  for (int i = 0; i < 100; ++i) {
    const double psi = rng.uniform(-1.5, 1.5);
    const double sig = rng.uniform(-1.5, 1.5);
    const arma::uword n = 1 + (rng.next_u64() % 12);
    const arma::uword nx = 1 + (rng.next_u64() % 5);
    const arma::uword ny = 1 + (rng.next_u64() % 5);
    CHECK(std::abs(arma::norm(ula_response(psi, n), 2) - 1.0) < 1e-12);
    CHECK(std::abs(arma::norm(upa_response(psi, sig, nx, ny), 2) - 1.0) < 1e-12);
  }
}

TEST_CASE("UPA response degenerate angles and enumeration order") {
  const arma::cx_vec flat = upa_response(0.0, arma::datum::pi / 2.0, 3, 2);
  for (const auto& e : flat)
    CHECK(std::abs(e - cx(1.0 / std::sqrt(6.0), 0.0)) < 1e-12);

  const arma::cx_vec one = upa_response(0.4, 0.9, 1, 1);
  CHECK(std::abs(one[0] - cx(1.0, 0.0)) < 1e-15);

  // n_x runs fast: entry 1 carries the sin(psi)sin(sigma) phase, entry n_x
  // the cos(sigma) phase.
  const double psi = 0.3, sig = 0.8;
  const arma::uword nx = 2, ny = 2;
  const arma::cx_vec a = upa_response(psi, sig, nx, ny);
  const double norm = 1.0 / 2.0;
  CHECK(std::abs(a[1] - std::polar(norm, arma::datum::pi * std::sin(psi) *
                                             std::sin(sig))) < 1e-12);
  CHECK(std::abs(a[2] - std::polar(norm, arma::datum::pi * std::cos(sig))) <
        1e-12);

  CHECK_THROWS_AS(upa_response(0.1, 0.1, 0, 2), std::invalid_argument);
}

TEST_CASE("upa_grid factors N with N_x >= sqrt(N)") {
  CHECK(upa_grid(16).n_x == 4);
  CHECK(upa_grid(16).n_y == 4);
  CHECK(upa_grid(50).n_x == 10);
  CHECK(upa_grid(50).n_y == 5);
  CHECK(upa_grid(12).n_x == 4);
  CHECK(upa_grid(12).n_y == 3);
  CHECK(upa_grid(7).n_x == 7);
  CHECK(upa_grid(7).n_y == 1);
  CHECK(upa_grid(1).n_x == 1);
}

TEST_CASE("single-path SV draw matches the direct outer product") {
  // beta = 1, all angles zero: G = sqrt(Nt*N) a_P(0,0) a_L(0)^H exactly.
  std::vector<PathParams> p(1);
  p[0].beta = cx(1.0, 0.0);
  const arma::uword N = 6, Nt = 3;
  const arma::cx_mat G = draw_sv_channel(ChannelKind::G, N, Nt, p);

  const auto grid = upa_grid(N);
  const arma::cx_mat want = std::sqrt(static_cast<double>(N * Nt)) *
                            upa_response(0.0, 0.0, grid.n_x, grid.n_y) *
                            ula_response(0.0, Nt).t();
  CHECK(cftest::max_abs(G - want) < 1e-12);

  // Zero gains give the zero matrix.
  std::vector<PathParams> z(3);
  for (auto& q : z) q.beta = cx(0.0, 0.0);
  CHECK(cftest::max_abs(draw_sv_channel(ChannelKind::h, 4, 1, z)) == 0.0);

  CHECK_THROWS_AS(draw_sv_channel(ChannelKind::h, 4, 1, {}),
                  std::invalid_argument);
}

TEST_CASE("SV variance bookkeeping: E||h||^2 = Nt * PL") {
  RngStream rng(11, DrawKind::Test);
  const arma::uword Nt = 4;
  const double pl = 1.0;
  const double sd = std::sqrt(pl / 2.0);
  double acc = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    std::vector<PathParams> paths(3);
    for (auto& p : paths) {
      p.beta = cx(sd * rng.normal(), sd * rng.normal());
      p.psi = rng.uniform(-arma::datum::pi / 2.0, arma::datum::pi / 2.0);
    }
    const arma::cx_mat h = draw_sv_channel(ChannelKind::h, Nt, 1, paths);
    acc += std::pow(arma::norm(h, "fro"), 2);
  }
  const double mean = acc / draws;
  CHECK(std::abs(mean - Nt * pl) / (Nt * pl) < 0.05);
}

TEST_CASE("composite channel reduces and matches the per-RIS oracle") {
  auto cfg = cftest::small_config(2, 3, 2, 4, 2, 5);
  const ChannelSet ch = cftest::channels_for(cfg);
  const arma::uword NR = ch.nr();

  RngStream rng(6, DrawKind::Test);
  arma::cx_vec theta(NR);
  for (auto& t : theta) t = std::polar(1.0, rng.uniform(0.0, 6.28));

  // No reflection: v = 0 leaves the direct channel.
  CHECK(cftest::max_abs(composite_channel(ch.h(0, 0), ch.G_stack(0),
                                          arma::cx_vec(NR, arma::fill::zeros),
                                          theta) -
                        ch.h(0, 0)) == 0.0);

  // Stacked form vs the per-RIS summation.
  for (arma::uword b = 0; b < cfg.B; ++b) {
    for (arma::uword k = 0; k < cfg.K; ++k) {
      const arma::cx_vec got =
          composite_channel(ch.h(b, k), ch.G_stack(b), ch.v_stack(k), theta);
      arma::cx_rowvec want = ch.h(b, k).t();
      for (arma::uword r = 0; r < cfg.R; ++r) {
        const arma::cx_vec th_r = theta.subvec(r * cfg.N, (r + 1) * cfg.N - 1);
        want += (ch.v(r, k) % th_r).t() * ch.G(b, r);
      }
      CHECK(cftest::max_abs(got.t() - want) < 1e-10);
    }
  }
}

TEST_CASE("scalar composite channel expands as h* + conj(theta) conj(v) g") {
  auto cfg = cftest::small_config(1, 1, 1, 1, 1, 8);
  const ChannelSet ch = cftest::channels_for(cfg);
  const cx theta = std::polar(1.0, 0.83);
  const arma::cx_vec got = composite_channel(
      ch.h(0, 0), ch.G_stack(0), ch.v_stack(0), arma::cx_vec{theta});
  const cx want = ch.h(0, 0)[0] +
                  std::conj(std::conj(theta) * std::conj(ch.v(0, 0)[0]) *
                            ch.G(0, 0)(0, 0));
  CHECK(std::abs(got[0] - want) < 1e-14);
}

TEST_CASE("composite channel validates inputs") {
  auto cfg = cftest::small_config(1, 1, 1, 4, 2, 9);
  const ChannelSet ch = cftest::channels_for(cfg);
  arma::cx_vec theta(4, arma::fill::ones);
  theta[2] = cx(0.5, 0.0);
  CHECK_THROWS_AS(
      composite_channel(ch.h(0, 0), ch.G_stack(0), ch.v_stack(0), theta),
      std::invalid_argument);
  CHECK_THROWS_AS(composite_channel(ch.h(0, 0), ch.G_stack(0), ch.v_stack(0),
                                    arma::cx_vec(3, arma::fill::ones)),
                  std::invalid_argument);
}

TEST_CASE("channel draws are bit-identical for one seed") {
  auto cfg = cftest::small_config(2, 2, 3, 6, 2, 123);
  const ChannelSet a = cftest::channels_for(cfg);
  const ChannelSet b = cftest::channels_for(cfg);
  for (arma::uword i = 0; i < cfg.B; ++i)
    for (arma::uword r = 0; r < cfg.R; ++r)
      CHECK(cftest::max_abs(a.G(i, r) - b.G(i, r)) == 0.0);
  for (arma::uword r = 0; r < cfg.R; ++r)
    for (arma::uword k = 0; k < cfg.K; ++k)
      CHECK(cftest::max_abs(a.v(r, k) - b.v(r, k)) == 0.0);
}

TEST_CASE("composite channel is affine in theta with the stacked kernel") {
  auto cfg = cftest::small_config(2, 2, 2, 4, 3, 15);
  const ChannelSet ch = cftest::channels_for(cfg);
  const arma::uword NR = ch.nr();

  for (arma::uword b = 0; b < cfg.B; ++b) {
    for (arma::uword k = 0; k < cfg.K; ++k) {
      // h_hat(theta) = h + M theta with M = G_b^H diag(v_k).
      const arma::cx_mat M = ch.G_stack(b).t() * arma::diagmat(ch.v_stack(k));
      for (int i = 0; i < 3; ++i) {
        const arma::cx_vec th = random_unit_theta(NR, 15, 40 + i);
        const arma::cx_vec got =
            composite_channel(ch.h(b, k), ch.G_stack(b), ch.v_stack(k), th);
        CHECK(arma::abs(got - (ch.h(b, k) + M * th)).max() < 1e-12);
      }
    }
  }
}
