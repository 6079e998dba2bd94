#include "mimosim/scenario.hpp"

#include <array>
#include <cmath>
#include <string>

namespace mimosim {

namespace {

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw std::invalid_argument("scenario." + field + ": " + what);
}

constexpr double kSqrt3 = 1.7320508075688772;

// Axial (q, r) neighbour offsets in ring-walk order.
constexpr std::array<std::array<int, 2>, 6> kHexDirections{{
    {{1, 0}}, {{1, -1}}, {{0, -1}}, {{-1, 0}}, {{-1, 1}}, {{0, 1}},
}};

}  // namespace

ScenarioConfig ScenarioConfig::cell_free(int aps, int users) {
  ScenarioConfig c;
  c.topology = Topology::CellFree;
  c.M = aps;
  c.K = users;
  c.d_min_m = 1.0;
  return c;
}

ScenarioConfig ScenarioConfig::multi_cell(int cells, int tx_antennas, int rx_antennas,
                                          int antennas_per_user) {
  ScenarioConfig c;
  c.topology = Topology::MultiCell;
  c.n_cells = cells;
  c.N_t = tx_antennas;
  c.N_r = rx_antennas;
  c.N_k = antennas_per_user;
  c.d_min_m = 35.0;
  return c;
}

void ScenarioConfig::validate() const {
  require(d_min_m > 0.0, "d_min_m", "must be positive");
  require(path_loss_exponent >= 0.0, "path_loss_exponent", "must be non-negative");
  require(shadowing_sigma_db >= 0.0, "shadowing_sigma_db", "must be non-negative");
  if (topology == Topology::CellFree) {
    require(K >= 1, "K", "must be at least 1");
    require(M >= K, "M", "must be at least K (" + std::to_string(K) + ")");
    require(area_side_m > 0.0, "area_side_m", "must be positive");
    require(d_min_m < area_side_m, "d_min_m", "must be smaller than area_side_m");
  } else {
    require(n_cells >= 1, "n_cells", "must be at least 1");
    require(N_k >= 1, "N_k", "must be at least 1");
    require(N_r >= 1, "N_r", "must be at least 1");
    require(N_t >= N_r, "N_t", "must be at least N_r (" + std::to_string(N_r) + ")");
    require(N_r % N_k == 0, "N_r", "must be a multiple of N_k");
    require(cell_radius_m > 0.0, "cell_radius_m", "must be positive");
    require(d_min_m < cell_radius_m, "d_min_m", "must be smaller than cell_radius_m");
  }
}

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

Geometry place_cf_topology(const ScenarioConfig& cfg, RandomStream& rng) {
  Geometry g;
  g.topology = Topology::CellFree;
  const double side = cfg.area_side_m;
  g.transmitters.reserve(static_cast<std::size_t>(cfg.M));
  for (int m = 0; m < cfg.M; ++m) {
    const double x = rng.uniform(0.0, side);
    const double y = rng.uniform(0.0, side);
    g.transmitters.push_back({x, y});
  }
  g.users.reserve(static_cast<std::size_t>(cfg.K));
  for (int k = 0; k < cfg.K; ++k) {
    const double x = rng.uniform(0.0, side);
    const double y = rng.uniform(0.0, side);
    g.users.push_back({x, y});
  }
  g.user_cell.assign(static_cast<std::size_t>(cfg.K), 0);
  return g;
}

Point hex_cell_center(int index, double radius) {
  int q = 0;
  int r = 0;
  if (index > 0) {
    // Locate the ring holding `index`: ring n holds 6n cells.
    int ring = 1;
    int first = 1;
    while (index >= first + 6 * ring) {
      first += 6 * ring;
      ++ring;
    }
    int offset = index - first;
    q = kHexDirections[4][0] * ring;
    r = kHexDirections[4][1] * ring;
    for (int side = 0; side < 6 && offset > 0; ++side) {
      const int steps = std::min(offset, ring);
      q += kHexDirections[side][0] * steps;
      r += kHexDirections[side][1] * steps;
      offset -= steps;
    }
  }
  return {radius * kSqrt3 * (q + 0.5 * r), radius * 1.5 * r};
}

bool inside_hexagon(const Point& p, const Point& center, double radius) {
  const double dx = std::abs(p.x - center.x);
  const double dy = std::abs(p.y - center.y);
  return dx <= 0.5 * kSqrt3 * radius && dy <= radius - dx / kSqrt3;
}

Geometry place_mc_topology(const ScenarioConfig& cfg, RandomStream& rng) {
  Geometry g;
  g.topology = Topology::MultiCell;
  const double R = cfg.cell_radius_m;
  const int per_cell = cfg.users_per_cell();
  for (int c = 0; c < cfg.n_cells; ++c) g.transmitters.push_back(hex_cell_center(c, R));
  for (int c = 0; c < cfg.n_cells; ++c) {
    const Point center = g.transmitters[static_cast<std::size_t>(c)];
    for (int u = 0; u < per_cell; ++u) {
      Point p;
      do {
        p = {center.x + rng.uniform(-0.5 * kSqrt3 * R, 0.5 * kSqrt3 * R),
             center.y + rng.uniform(-R, R)};
      } while (!inside_hexagon(p, center, R) || distance(p, center) < cfg.d_min_m);
      g.users.push_back(p);
      g.user_cell.push_back(c);
    }
  }
  return g;
}

Geometry place_topology(const ScenarioConfig& cfg, RandomStream& rng) {
  return cfg.topology == Topology::CellFree ? place_cf_topology(cfg, rng)
                                            : place_mc_topology(cfg, rng);
}

LinkGains::LinkGains(int n_cells)
    : n_cells_(n_cells), blocks_(static_cast<std::size_t>(n_cells) * n_cells) {}

RMatrix& LinkGains::block(int rx_cell, int tx_cell) {
  return blocks_.at(static_cast<std::size_t>(rx_cell * n_cells_ + tx_cell));
}

const RMatrix& LinkGains::block(int rx_cell, int tx_cell) const {
  return blocks_.at(static_cast<std::size_t>(rx_cell * n_cells_ + tx_cell));
}

double path_gain(double distance_m, double d_min_m, double exponent, double shadowing_db) {
  const double d = std::max(distance_m, d_min_m);
  return std::pow(d / d_min_m, -exponent) * std::pow(10.0, shadowing_db / 10.0);
}

RMatrix site_gains(const Geometry& geometry, const ScenarioConfig& cfg, RandomStream& rng) {
  const auto n_users = static_cast<Eigen::Index>(geometry.users.size());
  const auto n_sites = static_cast<Eigen::Index>(geometry.transmitters.size());
  RMatrix gains(n_users, n_sites);
  for (Eigen::Index u = 0; u < n_users; ++u) {
    for (Eigen::Index s = 0; s < n_sites; ++s) {
      const double z = cfg.shadowing_sigma_db > 0.0 ? cfg.shadowing_sigma_db * rng.normal() : 0.0;
      const double d = distance(geometry.users[static_cast<std::size_t>(u)],
                                geometry.transmitters[static_cast<std::size_t>(s)]);
      gains(u, s) = path_gain(d, cfg.d_min_m, cfg.path_loss_exponent, z);
    }
  }
  return gains;
}

LinkGains large_scale_coefficients(const Geometry& geometry, const ScenarioConfig& cfg,
                                   RandomStream& rng) {
  const int cells = cfg.cells();
  const int rx = cfg.rx_dim();
  const int tx = cfg.tx_dim();
  LinkGains gains(cells);
  if (cfg.fading_mode == FadingMode::IidUnit) {
    for (int c = 0; c < cells; ++c)
      for (int cp = 0; cp < cells; ++cp) gains.block(c, cp) = RMatrix::Ones(rx, tx);
    return gains;
  }

  const RMatrix sites = site_gains(geometry, cfg, rng);
  if (cfg.topology == Topology::CellFree) {
    gains.block(0, 0) = sites;
    return gains;
  }

  // Every antenna of a user sees the same gain to a BS, and every antenna of
  // a BS shares its site.
  const int per_cell = cfg.users_per_cell();
  const int nk = cfg.N_k;
  for (int c = 0; c < cells; ++c) {
    for (int cp = 0; cp < cells; ++cp) {
      RMatrix& b = gains.block(c, cp);
      b.resize(rx, tx);
      for (int u = 0; u < per_cell; ++u) {
        const double g = sites(c * per_cell + u, cp);
        b.middleRows(u * nk, nk).setConstant(g);
      }
    }
  }
  return gains;
}

double normalize_mean_db(LinkGains& gains) {
  double sum_db = 0.0;
  long count = 0;
  for (int c = 0; c < gains.n_cells(); ++c) {
    const RMatrix& b = gains.block(c, c);
    sum_db += (10.0 * b.array().log10()).sum();
    count += b.size();
  }
  if (count == 0) return 1.0;
  const double divisor = std::pow(10.0, sum_db / static_cast<double>(count) / 10.0);
  for (int c = 0; c < gains.n_cells(); ++c)
    for (int cp = 0; cp < gains.n_cells(); ++cp) gains.block(c, cp) /= divisor;
  return divisor;
}

ChannelBlock draw_channel(const RMatrix& beta, double sigma_e_sq, RandomStream& rng) {
  if (!(sigma_e_sq >= 0.0 && sigma_e_sq <= 1.0))
    throw std::invalid_argument("sigma_e_sq must lie in [0, 1], got " + std::to_string(sigma_e_sq));
  if ((beta.array() < 0.0).any()) throw std::invalid_argument("large-scale gains must be non-negative");

  ChannelBlock b;
  b.beta = beta;
  const auto rows = beta.rows();
  const auto cols = beta.cols();
  b.H_hat.resize(rows, cols);
  b.H_tilde = CMatrix::Zero(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      b.H_hat(i, j) = rng.complex_normal((1.0 - sigma_e_sq) * beta(i, j));
  if (sigma_e_sq > 0.0) {
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j)
        b.H_tilde(i, j) = rng.complex_normal(sigma_e_sq * beta(i, j));
  }
  b.H = b.H_hat + b.H_tilde;
  return b;
}

ChannelRealization draw_channels(const LinkGains& gains, double sigma_e_sq, const RandomStream& rng) {
  ChannelRealization ch;
  ch.n_cells = gains.n_cells();
  ch.blocks.reserve(static_cast<std::size_t>(ch.n_cells) * ch.n_cells);
  for (int c = 0; c < ch.n_cells; ++c) {
    for (int cp = 0; cp < ch.n_cells; ++cp) {
      auto stream = rng.child({static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(cp)});
      ch.blocks.push_back(draw_channel(gains.block(c, cp), sigma_e_sq, stream));
    }
  }
  return ch;
}

RVector g_tilde(const RMatrix& beta, double sigma_e_sq) {
  return sigma_e_sq * beta.colwise().sum().transpose();
}

}  // namespace mimosim
