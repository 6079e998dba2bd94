#pragma once

#include "mimosim/types.hpp"

namespace mimosim {

/// Power and noise parameters for one transmitter.
///
/// `e_tx` bounds tr(P N C_s N^H P^H). `rho_f` is the amplitude factor of the
/// received-signal equation y = sqrt(rho_f) H x + n; the simulator runs with
/// rho_f = 1 and carries the power in P. `antenna_limit` is the per-antenna
/// power cap used by the cell-free constraint (E_tx / M by default). Symbol
/// covariance is fixed to the identity.
struct LinkBudget {
  double e_tx = 1.0;
  double rho_f = 1.0;
  double sigma_n_sq = 1.0;
  double antenna_limit = 1.0;

  /// tr(C_n) for `rx_dim` receive streams.
  double noise_trace(Eigen::Index rx_dim) const { return sigma_n_sq * static_cast<double>(rx_dim); }
  void validate() const;

  /// Budget for an SNR point: E_tx = 10^(snr/10) * sigma_n_sq spread over
  /// `tx_antennas` for the per-antenna cap.
  static LinkBudget from_snr_db(double snr_db, Eigen::Index tx_antennas, double sigma_n_sq = 1.0);
};

/// Linear precoder: transmit-dim x stream-dim matrix plus the scalar f the
/// receiver applies so that f * sqrt(rho_f) * H * P is close to identity.
struct Precoder {
  CMatrix P;
  double f = 1.0;
  PrecoderKind kind = PrecoderKind::MF;
  /// Scalar applied to the unnormalized solution to meet E_tx.
  double scale = 1.0;
};

/// tr(P N N^H P^H) for diagonal N = diag(amplitudes).
double transmit_power(const CMatrix& P, const RVector& amplitudes);

/// MSE-optimal scalar receive gain for fixed (H, P, N):
/// Re tr(sqrt(rho) H P N) / (rho ||H P N||_F^2 + tr(C_n)).
double optimal_receive_gain(const CMatrix& H, const CMatrix& P, const RVector& amplitudes,
                            const LinkBudget& budget);

/// Conjugate beamforming P = c H^H with tr(P P^H) = E_tx.
Precoder mf_precoder(const CMatrix& H_hat, const LinkBudget& budget);

/// Right pseudo-inverse H^H (H H^H)^{-1}; throws SingularMatrixError when
/// H H^H is numerically singular.
CMatrix zf_direction(const CMatrix& H_hat);
Precoder zf_precoder(const CMatrix& H_hat, const LinkBudget& budget);

/// Regularized inverse H^H (H H^H + c I)^{-1} N^{-1} with
/// c = tr(C_n) / (rho_f E_tx). Throws std::domain_error for non-positive
/// amplitudes.
CMatrix mmse_direction(const CMatrix& H_hat, const RVector& amplitudes, const LinkBudget& budget);
Precoder mmse_precoder(const CMatrix& H_hat, const RVector& amplitudes, const LinkBudget& budget);

/// Dispatches on `kind`; `amplitudes` only matters for MMSE.
Precoder make_precoder(PrecoderKind kind, const CMatrix& H_hat, const RVector& amplitudes,
                       const LinkBudget& budget);

}  // namespace mimosim
