#pragma once

#include <vector>

#include "mimosim/random.hpp"
#include "mimosim/types.hpp"

namespace mimosim {

enum class FadingMode {
  IidUnit,     // beta = 1 everywhere; isolates algebra from geometry
  LargeScale,  // power-law path loss with log-normal shadowing
};

// Rescaling applied to the large-scale gains before channel draws.
enum class GainNormalization {
  None,
  MeanDb,  // shift so the serving links average 0 dB
};

struct ScenarioConfig {
  Topology topology = Topology::CellFree;

  // Cell-free: M single-antenna APs serve K single-antenna users.
  int M = 64;
  int K = 16;

  // Multi-cell: n_cells BSs with N_t antennas; each cell holds N_r/N_k users
  // of N_k antennas.
  int n_cells = 4;
  int N_t = 16;
  int N_r = 4;
  int N_k = 1;

  double area_side_m = 1000.0;
  double cell_radius_m = 500.0;
  double d_min_m = 1.0;
  double path_loss_exponent = 3.5;
  double shadowing_sigma_db = 8.0;
  FadingMode fading_mode = FadingMode::LargeScale;
  GainNormalization normalization = GainNormalization::MeanDb;

  static ScenarioConfig cell_free(int aps, int users);
  static ScenarioConfig multi_cell(int cells, int tx_antennas, int rx_antennas, int antennas_per_user = 1);

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  int cells() const { return topology == Topology::CellFree ? 1 : n_cells; }
  /// Transmit antennas per cell (M or N_t).
  int tx_dim() const { return topology == Topology::CellFree ? M : N_t; }
  /// Receive streams per cell (K or N_r).
  int rx_dim() const { return topology == Topology::CellFree ? K : N_r; }
  int users_per_cell() const { return topology == Topology::CellFree ? K : N_r / N_k; }
  int antennas_per_user() const { return topology == Topology::CellFree ? 1 : N_k; }
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Point& a, const Point& b);

struct Geometry {
  Topology topology = Topology::CellFree;
  /// AP positions (cell-free) or BS sites (multi-cell).
  std::vector<Point> transmitters;
  /// User positions; multi-cell users are grouped by serving cell.
  std::vector<Point> users;
  /// Serving cell of each user (all zero for cell-free).
  std::vector<int> user_cell;
};

Geometry place_cf_topology(const ScenarioConfig& cfg, RandomStream& rng);
Geometry place_mc_topology(const ScenarioConfig& cfg, RandomStream& rng);
Geometry place_topology(const ScenarioConfig& cfg, RandomStream& rng);

/// Center of hexagonal cell `index` on a pointy-top lattice, filled ring by
/// ring outward from the origin.
Point hex_cell_center(int index, double radius);
bool inside_hexagon(const Point& p, const Point& center, double radius);

/// Large-scale gains per (receive-cell, transmit-cell) block. Block (c, c')
/// has shape rx_dim x tx_dim and holds the gain from the transmitter(s) of
/// cell c' to the receive antennas of cell c. Cell-free uses a single block.
class LinkGains {
 public:
  LinkGains() = default;
  explicit LinkGains(int n_cells);

  int n_cells() const { return n_cells_; }
  RMatrix& block(int rx_cell, int tx_cell);
  const RMatrix& block(int rx_cell, int tx_cell) const;

 private:
  int n_cells_ = 0;
  std::vector<RMatrix> blocks_;
};

/// Gain of one link: (max(d, d_min)/d_min)^(-exponent) * 10^(z/10).
double path_gain(double distance_m, double d_min_m, double exponent, double shadowing_db);

/// Per (user, transmitter site) gains in linear scale; user x site matrix.
RMatrix site_gains(const Geometry& geometry, const ScenarioConfig& cfg, RandomStream& rng);

/// Gains expanded to channel blocks. All ones in IidUnit mode; no
/// normalization is applied here.
LinkGains large_scale_coefficients(const Geometry& geometry, const ScenarioConfig& cfg,
                                   RandomStream& rng);

/// Divides every block by the geometric mean of the serving-link gains
/// (blocks (c, c)), returning the applied divisor.
double normalize_mean_db(LinkGains& gains);

struct ChannelBlock {
  CMatrix H;        // true channel, rx x tx
  CMatrix H_hat;    // transmitter's estimate
  CMatrix H_tilde;  // estimation error, H = H_hat + H_tilde
  RMatrix beta;
};

struct ChannelRealization {
  int n_cells = 0;
  std::vector<ChannelBlock> blocks;

  ChannelBlock& block(int rx_cell, int tx_cell) { return blocks.at(rx_cell * n_cells + tx_cell); }
  const ChannelBlock& block(int rx_cell, int tx_cell) const {
    return blocks.at(rx_cell * n_cells + tx_cell);
  }
};

/// Estimate entries ~ CN(0, (1 - s)beta), error entries ~ CN(0, s beta),
/// drawn independently; H is their sum. Rejects s outside [0, 1].
ChannelBlock draw_channel(const RMatrix& beta, double sigma_e_sq, RandomStream& rng);

/// Draws every block from its own child stream of `rng`.
ChannelRealization draw_channels(const LinkGains& gains, double sigma_e_sq, const RandomStream& rng);

/// Diagonal of E[H_tilde^H H_tilde]: entry j is sum_i sigma_e_sq * beta(i, j).
RVector g_tilde(const RMatrix& beta, double sigma_e_sq);

struct CsitErrorModel {
  double sigma_e_sq = 0.0;

  RVector g_tilde(const RMatrix& beta) const { return mimosim::g_tilde(beta, sigma_e_sq); }
};

}  // namespace mimosim
