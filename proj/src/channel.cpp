#include "cellfree/channel.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "cellfree/rng.hpp"

namespace cellfree {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Folds an angle into [-pi/2, pi/2] keeping sin() unchanged, which is all a
// steering vector sees of the azimuth.
double fold_azimuth(double a) {
  a = std::remainder(a, 2.0 * kPi);
  if (a > kPi / 2.0) a = kPi - a;
  if (a < -kPi / 2.0) a = -kPi - a;
  return a;
}

struct GeoAngles {
  double azimuth;
  double elevation;
};

// Direction angles of the segment from `from` to `to`.
GeoAngles geo_angles(const arma::rowvec& from, const arma::rowvec& to) {
  const arma::rowvec d = to - from;
  const double horiz = std::hypot(d[0], d[1]);
  GeoAngles g;
  g.azimuth = fold_azimuth(std::atan2(d[1], d[0]));
  g.elevation = std::atan2(d[2], horiz);  // already in [-pi/2, pi/2]
  return g;
}

std::vector<PathParams> draw_paths(RngStream& rng, arma::uword count,
                                   double pl, const GeoAngles& los_aoa,
                                   const GeoAngles& los_aod) {
  std::vector<PathParams> paths(count);
  const double sd = std::sqrt(pl / 2.0);
  for (arma::uword l = 0; l < count; ++l) {
    paths[l].beta = cx(sd * rng.normal(), sd * rng.normal());
    if (l == 0) {
      // LoS path: geometric angles from the deployment.
      paths[l].psi = los_aoa.azimuth;
      paths[l].sigma = los_aoa.elevation;
      paths[l].chi = los_aod.azimuth;
    } else {
      paths[l].psi = rng.uniform(-kPi / 2.0, kPi / 2.0);
      paths[l].sigma = rng.uniform(-kPi / 2.0, kPi / 2.0);
      paths[l].chi = rng.uniform(-kPi / 2.0, kPi / 2.0);
    }
  }
  return paths;
}

}  // namespace

arma::cx_vec ula_response(double psi, arma::uword n_l) {
  if (n_l == 0) throw std::invalid_argument("ula_response: N_L must be >= 1");
  arma::cx_vec a(n_l);
  const double s = std::sin(psi);
  const double norm = 1.0 / std::sqrt(static_cast<double>(n_l));
  for (arma::uword n = 0; n < n_l; ++n)
    a[n] = std::polar(norm, kPi * static_cast<double>(n) * s);
  return a;
}

arma::cx_vec upa_response(double psi, double sigma, arma::uword n_x,
                          arma::uword n_y) {
  if (n_x == 0 || n_y == 0)
    throw std::invalid_argument("upa_response: antenna counts must be >= 1");
  arma::cx_vec a(n_x * n_y);
  const double sx = std::sin(psi) * std::sin(sigma);
  const double cy = std::cos(sigma);
  const double norm = 1.0 / std::sqrt(static_cast<double>(n_x * n_y));
  arma::uword idx = 0;
  for (arma::uword ny = 0; ny < n_y; ++ny)
    for (arma::uword nx = 0; nx < n_x; ++nx)
      a[idx++] = std::polar(norm, kPi * (static_cast<double>(nx) * sx +
                                         static_cast<double>(ny) * cy));
  return a;
}

UpaGrid upa_grid(arma::uword n) {
  if (n == 0) throw std::invalid_argument("upa_grid: N must be >= 1");
  const double root = std::sqrt(static_cast<double>(n));
  for (arma::uword d = static_cast<arma::uword>(std::ceil(root) + 0.5); d <= n; ++d) {
    if (n % d == 0) return {d, n / d};
  }
  return {n, 1};
}

arma::cx_mat draw_sv_channel(ChannelKind kind, arma::uword n_rows,
                             arma::uword n_cols,
                             const std::vector<PathParams>& paths,
                             double scale) {
  if (paths.empty())
    throw std::invalid_argument("draw_sv_channel: path list must be non-empty");

  arma::cx_mat m(n_rows, n_cols, arma::fill::zeros);
  const double lp = static_cast<double>(paths.size());

  switch (kind) {
    case ChannelKind::G: {
      const UpaGrid grid = upa_grid(n_rows);
      const double pre =
          std::sqrt(static_cast<double>(n_rows * n_cols) / lp) * scale;
      for (const auto& p : paths)
        m += pre * p.beta * upa_response(p.psi, p.sigma, grid.n_x, grid.n_y) *
             ula_response(p.chi, n_cols).t();
      break;
    }
    case ChannelKind::v: {
      if (n_cols != 1)
        throw std::invalid_argument("draw_sv_channel: v must be a column");
      const UpaGrid grid = upa_grid(n_rows);
      const double pre = std::sqrt(static_cast<double>(n_rows) / lp) * scale;
      for (const auto& p : paths)
        m += pre * p.beta * upa_response(p.psi, p.sigma, grid.n_x, grid.n_y);
      break;
    }
    case ChannelKind::h: {
      if (n_cols != 1)
        throw std::invalid_argument("draw_sv_channel: h must be a column");
      const double pre = std::sqrt(static_cast<double>(n_rows) / lp) * scale;
      for (const auto& p : paths)
        m += pre * p.beta * ula_response(p.psi, n_rows);
      break;
    }
  }
  return m;
}

ChannelSet make_channels(const SystemConfig& config, const Scenario& scenario) {
  SystemConfig cfg = config;
  cfg.validate_and_finalize();
  if (scenario.bs_positions.n_rows != cfg.B ||
      scenario.ris_positions.n_rows != cfg.R ||
      scenario.ue_positions.n_rows != cfg.K)
    throw std::invalid_argument("make_channels: scenario/config size mismatch");

  ChannelSet ch;
  ch.B = cfg.B;
  ch.R = cfg.R;
  ch.K = cfg.K;
  ch.N = cfg.N;
  ch.N_t = cfg.N_t;
  ch.G.set_size(cfg.B, cfg.R);
  ch.v.set_size(cfg.R, cfg.K);
  ch.h.set_size(cfg.B, cfg.K);

  const arma::uword lp = cfg.paths_per_channel;

  for (arma::uword b = 0; b < cfg.B; ++b) {
    for (arma::uword r = 0; r < cfg.R; ++r) {
      RngStream rng(cfg.seed, DrawKind::ChannelG, b, r);
      const double d = distance(scenario.bs_positions.row(b),
                                scenario.ris_positions.row(r));
      const double pl = path_loss(d, LinkKind::BsRis, scenario.pathloss);
      const auto aoa = geo_angles(scenario.ris_positions.row(r),
                                  scenario.bs_positions.row(b));
      const auto aod = geo_angles(scenario.bs_positions.row(b),
                                  scenario.ris_positions.row(r));
      ch.G(b, r) = draw_sv_channel(ChannelKind::G, cfg.N, cfg.N_t,
                                   draw_paths(rng, lp, pl, aoa, aod));
    }
  }
  for (arma::uword r = 0; r < cfg.R; ++r) {
    for (arma::uword k = 0; k < cfg.K; ++k) {
      RngStream rng(cfg.seed, DrawKind::ChannelV, r, k);
      const double d = distance(scenario.ris_positions.row(r),
                                scenario.ue_positions.row(k));
      const double pl = path_loss(d, LinkKind::RisUe, scenario.pathloss);
      const auto aoa = geo_angles(scenario.ris_positions.row(r),
                                  scenario.ue_positions.row(k));
      ch.v(r, k) = draw_sv_channel(ChannelKind::v, cfg.N, 1,
                                   draw_paths(rng, lp, pl, aoa, aoa));
    }
  }
  for (arma::uword b = 0; b < cfg.B; ++b) {
    for (arma::uword k = 0; k < cfg.K; ++k) {
      RngStream rng(cfg.seed, DrawKind::ChannelH, b, k);
      const double d = distance(scenario.bs_positions.row(b),
                                scenario.ue_positions.row(k));
      const double pl = path_loss(d, LinkKind::BsUe, scenario.pathloss);
      const auto aod = geo_angles(scenario.bs_positions.row(b),
                                  scenario.ue_positions.row(k));
      ch.h(b, k) = draw_sv_channel(ChannelKind::h, cfg.N_t, 1,
                                   draw_paths(rng, lp, pl, aod, aod));
    }
  }

  // Stacked forms: G_b vertically over RIS blocks, V_k as its diagonal.
  ch.G_stack.set_size(cfg.B);
  for (arma::uword b = 0; b < cfg.B; ++b) {
    arma::cx_mat gs(ch.nr(), cfg.N_t);
    for (arma::uword r = 0; r < cfg.R; ++r)
      gs.rows(r * cfg.N, (r + 1) * cfg.N - 1) = ch.G(b, r);
    ch.G_stack(b) = std::move(gs);
  }
  ch.v_stack.set_size(cfg.K);
  for (arma::uword k = 0; k < cfg.K; ++k) {
    arma::cx_vec vs(ch.nr());
    for (arma::uword r = 0; r < cfg.R; ++r)
      vs.subvec(r * cfg.N, (r + 1) * cfg.N - 1) = ch.v(r, k);
    ch.v_stack(k) = std::move(vs);
  }
  return ch;
}

arma::cx_vec composite_channel(const arma::cx_vec& h_bk,
                               const arma::cx_mat& G_b,
                               const arma::cx_vec& v_stack_k,
                               const arma::cx_vec& theta) {
  if (G_b.n_rows != v_stack_k.n_elem || G_b.n_rows != theta.n_elem)
    throw std::invalid_argument("composite_channel: dimension mismatch");
  for (arma::uword i = 0; i < theta.n_elem; ++i) {
    if (std::abs(std::abs(theta[i]) - 1.0) > 1e-9)
      throw std::invalid_argument("composite_channel: theta must be unit-modulus");
  }
  // h_hat = h + G_b^H V_k theta, with V_k theta an elementwise product.
  return h_bk + G_b.t() * (v_stack_k % theta);
}

void dump_channels_csv(const ChannelSet& ch, std::ostream& out) {
  out << "kind,b,r,k,row,col,re,im\n";
  char buf[160];
  auto emit = [&](const char* kind, long long b, long long r, long long k,
                  arma::uword row, arma::uword col, cx val) {
    std::snprintf(buf, sizeof(buf), "%s,%lld,%lld,%lld,%llu,%llu,%.17g,%.17g\n",
                  kind, b, r, k, static_cast<unsigned long long>(row),
                  static_cast<unsigned long long>(col), val.real(), val.imag());
    out << buf;
  };
  for (arma::uword b = 0; b < ch.B; ++b)
    for (arma::uword r = 0; r < ch.R; ++r)
      for (arma::uword col = 0; col < ch.N_t; ++col)
        for (arma::uword row = 0; row < ch.N; ++row)
          emit("G", b, r, -1, row, col, ch.G(b, r)(row, col));
  for (arma::uword r = 0; r < ch.R; ++r)
    for (arma::uword k = 0; k < ch.K; ++k)
      for (arma::uword row = 0; row < ch.N; ++row)
        emit("v", -1, r, k, row, 0, ch.v(r, k)[row]);
  for (arma::uword b = 0; b < ch.B; ++b)
    for (arma::uword k = 0; k < ch.K; ++k)
      for (arma::uword row = 0; row < ch.N_t; ++row)
        emit("h", b, -1, k, row, 0, ch.h(b, k)[row]);
}

}  // namespace cellfree
