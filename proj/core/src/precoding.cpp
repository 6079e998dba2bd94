#include "mimosim/precoding.hpp"

#include <cmath>
#include <sstream>

namespace mimosim {

namespace {

// Below this reciprocal condition number the Gram matrix is treated as
// singular.
constexpr double kMinRcond = 1e-12;

void normalize_to_budget(Precoder& p, const RVector& amplitudes, const LinkBudget& budget) {
  const double power = transmit_power(p.P, amplitudes);
  if (!(power > 0.0) || !std::isfinite(power))
    throw SingularMatrixError(to_string(p.kind) + ": precoder carries no power");
  p.scale = std::sqrt(budget.e_tx / power);
  p.P *= p.scale;
}

}  // namespace

void LinkBudget::validate() const {
  if (!(e_tx > 0.0)) throw std::invalid_argument("link budget: e_tx must be positive");
  if (!(rho_f > 0.0)) throw std::invalid_argument("link budget: rho_f must be positive");
  if (!(sigma_n_sq >= 0.0)) throw std::invalid_argument("link budget: sigma_n_sq must be non-negative");
  if (!(antenna_limit > 0.0)) throw std::invalid_argument("link budget: antenna_limit must be positive");
}

LinkBudget LinkBudget::from_snr_db(double snr_db, Eigen::Index tx_antennas, double sigma_n_sq) {
  LinkBudget b;
  b.sigma_n_sq = sigma_n_sq;
  b.e_tx = std::pow(10.0, snr_db / 10.0) * sigma_n_sq;
  b.rho_f = 1.0;
  b.antenna_limit = b.e_tx / static_cast<double>(tx_antennas);
  return b;
}

double transmit_power(const CMatrix& P, const RVector& amplitudes) {
  return (P.colwise().squaredNorm().transpose().array() * amplitudes.array().square()).sum();
}

double optimal_receive_gain(const CMatrix& H, const CMatrix& P, const RVector& amplitudes,
                            const LinkBudget& budget) {
  const CMatrix G = std::sqrt(budget.rho_f) * (H * P) * amplitudes.asDiagonal();
  const double num = G.trace().real();
  const double den = G.squaredNorm() + budget.noise_trace(H.rows());
  return den > 0.0 ? num / den : 0.0;
}

Precoder mf_precoder(const CMatrix& H_hat, const LinkBudget& budget) {
  Precoder p;
  p.kind = PrecoderKind::MF;
  p.P = H_hat.adjoint();
  const RVector unit = RVector::Ones(H_hat.rows());
  normalize_to_budget(p, unit, budget);
  p.f = optimal_receive_gain(H_hat, p.P, unit, budget);
  return p;
}

CMatrix zf_direction(const CMatrix& H_hat) {
  const CMatrix gram = H_hat * H_hat.adjoint();
  Eigen::LLT<CMatrix> llt(gram);
  const double rcond = llt.info() == Eigen::Success ? llt.rcond() : 0.0;
  if (!(rcond > kMinRcond)) {
    std::ostringstream msg;
    msg << "ZF: Gram matrix of the " << H_hat.rows() << "x" << H_hat.cols()
        << " channel estimate is singular (rcond=" << rcond << ")";
    throw SingularMatrixError(msg.str());
  }
  return H_hat.adjoint() * llt.solve(CMatrix::Identity(H_hat.rows(), H_hat.rows()));
}

Precoder zf_precoder(const CMatrix& H_hat, const LinkBudget& budget) {
  Precoder p;
  p.kind = PrecoderKind::ZF;
  p.P = zf_direction(H_hat);
  normalize_to_budget(p, RVector::Ones(H_hat.rows()), budget);
  p.f = 1.0 / (p.scale * std::sqrt(budget.rho_f));
  return p;
}

CMatrix mmse_direction(const CMatrix& H_hat, const RVector& amplitudes, const LinkBudget& budget) {
  if (amplitudes.size() != H_hat.rows())
    throw std::invalid_argument("MMSE: allocation size does not match stream count");
  if ((amplitudes.array() <= 0.0).any())
    throw std::domain_error("MMSE: power allocation must be strictly positive to invert N");
  const auto K = H_hat.rows();
  const double reg = budget.noise_trace(K) / (budget.rho_f * budget.e_tx);
  const CMatrix A = H_hat * H_hat.adjoint() + reg * CMatrix::Identity(K, K);
  Eigen::LLT<CMatrix> llt(A);
  if (llt.info() != Eigen::Success)
    throw SingularMatrixError("MMSE: regularized Gram matrix is not positive definite");
  CMatrix P0 = H_hat.adjoint() * llt.solve(CMatrix::Identity(K, K));
  P0 *= amplitudes.cwiseInverse().asDiagonal();
  return P0;
}

Precoder mmse_precoder(const CMatrix& H_hat, const RVector& amplitudes, const LinkBudget& budget) {
  Precoder p;
  p.kind = PrecoderKind::MMSE;
  p.P = mmse_direction(H_hat, amplitudes, budget) / std::sqrt(budget.rho_f);
  normalize_to_budget(p, amplitudes, budget);
  // Wiener receiver: the 1/sqrt(rho_f) above already cancels the amplitude
  // factor, so the gain only undoes the power normalization.
  p.f = 1.0 / p.scale;
  return p;
}

Precoder make_precoder(PrecoderKind kind, const CMatrix& H_hat, const RVector& amplitudes,
                       const LinkBudget& budget) {
  switch (kind) {
    case PrecoderKind::MF: return mf_precoder(H_hat, budget);
    case PrecoderKind::ZF: return zf_precoder(H_hat, budget);
    case PrecoderKind::MMSE: return mmse_precoder(H_hat, amplitudes, budget);
  }
  throw std::invalid_argument("unknown precoder kind");
}

}  // namespace mimosim
