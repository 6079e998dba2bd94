#include "mimosim/link.hpp"

#include <cmath>
#include <stdexcept>

namespace mimosim {

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

void check_frame(const CMatrix& y, const CVector& gains) {
  if (y.rows() != gains.size()) throw std::invalid_argument("detect: gain count does not match streams");
}

}  // namespace

Bits random_bits(std::size_t count, RandomStream& rng) {
  Bits bits(count);
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < count; ++i) {
    if (i % 64 == 0) word = rng.bits64();
    bits[i] = static_cast<std::uint8_t>(word & 1u);
    word >>= 1;
  }
  return bits;
}

CVector qpsk_modulate(const Bits& bits) {
  if (bits.size() % 2 != 0) throw std::invalid_argument("qpsk_modulate: odd number of bits");
  CVector s(static_cast<Eigen::Index>(bits.size() / 2));
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double re = 1.0 - 2.0 * bits[2 * i];
    const double im = 1.0 - 2.0 * bits[2 * i + 1];
    s(i) = Complex(re * kInvSqrt2, im * kInvSqrt2);
  }
  return s;
}

Bits qpsk_demodulate(const CVector& symbols) {
  Bits bits(static_cast<std::size_t>(2 * symbols.size()));
  for (Eigen::Index i = 0; i < symbols.size(); ++i) {
    bits[2 * i] = symbols(i).real() < 0.0 ? 1 : 0;
    bits[2 * i + 1] = symbols(i).imag() < 0.0 ? 1 : 0;
  }
  return bits;
}

CMatrix qpsk_frame(const Bits& bits, Eigen::Index streams) {
  const CVector s = qpsk_modulate(bits);
  if (streams <= 0 || s.size() % streams != 0)
    throw std::invalid_argument("qpsk_frame: bit count is not a whole number of frames");
  return Eigen::Map<const CMatrix>(s.data(), streams, s.size() / streams);
}

CMatrix transmit(const CMatrix& symbols, const CMatrix& P, const RVector& amplitudes) {
  if (P.cols() != symbols.rows() || amplitudes.size() != symbols.rows())
    throw std::invalid_argument("transmit: precoder, allocation and symbol sizes disagree");
  return P * (amplitudes.asDiagonal() * symbols);
}

CMatrix receive(const CMatrix& x, const CMatrix& H, double sigma_n_sq, double rho_f, RandomStream& rng) {
  if (H.cols() != x.rows()) throw std::invalid_argument("receive: channel and transmit sizes disagree");
  CMatrix y = std::sqrt(rho_f) * (H * x);
  y += rng.complex_normal_matrix(y.rows(), y.cols(), sigma_n_sq);
  return y;
}

CMatrix receive_cell(const ChannelRealization& channel, int rx_cell, const std::vector<CMatrix>& x,
                     double sigma_n_sq, double rho_f, RandomStream& rng) {
  if (static_cast<int>(x.size()) != channel.n_cells)
    throw std::invalid_argument("receive_cell: need one transmit block per cell");
  const double amp = std::sqrt(rho_f);
  CMatrix y = amp * (channel.block(rx_cell, rx_cell).H * x[rx_cell]);
  for (int c = 0; c < channel.n_cells; ++c) {
    if (c == rx_cell) continue;
    y += amp * (channel.block(rx_cell, c).H * x[c]);
  }
  y += rng.complex_normal_matrix(y.rows(), y.cols(), sigma_n_sq);
  return y;
}

CVector effective_gains(const CMatrix& H, const CMatrix& P, const RVector& amplitudes, double rho_f) {
  return std::sqrt(rho_f) * ((H * P).diagonal().array() * amplitudes.array()).matrix();
}

Detection detect(const CMatrix& y, const CVector& gains, double f) {
  check_frame(y, gains);
  if (!(f > 0.0) || !std::isfinite(f)) throw std::invalid_argument("detect: receive gain f must be positive");
  const Eigen::Index K = y.rows();
  Detection out;
  out.failed.assign(static_cast<std::size_t>(K), false);
  CMatrix s_hat = y;
  for (Eigen::Index k = 0; k < K; ++k) {
    if (gains(k) == Complex(0.0, 0.0)) {
      out.failed[k] = true;
      s_hat.row(k).setZero();
    } else {
      s_hat.row(k) *= f / gains(k);
    }
  }
  out.bits = qpsk_demodulate(Eigen::Map<const CVector>(s_hat.data(), s_hat.size()));
  return out;
}

BitCount ber_count(const Bits& tx, const Bits& rx) {
  if (tx.size() != rx.size()) throw std::invalid_argument("ber_count: frame lengths differ");
  BitCount c;
  c.total = tx.size();
  for (std::size_t i = 0; i < tx.size(); ++i) c.errors += tx[i] != rx[i];
  return c;
}

BitCount ber_count(const Bits& tx, const Detection& rx) {
  if (tx.size() != rx.bits.size()) throw std::invalid_argument("ber_count: frame lengths differ");
  const std::size_t K = rx.failed.size();
  BitCount c;
  c.total = tx.size();
  for (std::size_t i = 0; i < tx.size(); ++i) {
    const std::size_t stream = (i / 2) % K;
    c.errors += rx.failed[stream] || tx[i] != rx.bits[i];
  }
  return c;
}

double sum_rate(const CMatrix& H, const CMatrix& P, const RVector& amplitudes, double rho_f,
                double sigma_n_sq) {
  const CMatrix G = std::sqrt(rho_f) * H * P * amplitudes.asDiagonal();
  const RMatrix power = G.cwiseAbs2();
  double rate = 0.0;
  for (Eigen::Index k = 0; k < G.rows(); ++k) {
    const double signal = power(k, k);
    const double leak = power.row(k).sum() - signal;
    rate += std::log2(1.0 + signal / (leak + sigma_n_sq));
  }
  return rate;
}

double sum_rate_cell(const ChannelRealization& channel, int rx_cell, const std::vector<CMatrix>& P,
                     const std::vector<RVector>& amplitudes, double rho_f, double sigma_n_sq) {
  const int C = channel.n_cells;
  if (static_cast<int>(P.size()) != C || static_cast<int>(amplitudes.size()) != C)
    throw std::invalid_argument("sum_rate_cell: need one precoder and allocation per cell");
  const CMatrix G = std::sqrt(rho_f) * channel.block(rx_cell, rx_cell).H * P[rx_cell] *
                    amplitudes[rx_cell].asDiagonal();
  RVector ici = RVector::Zero(G.rows());
  for (int c = 0; c < C; ++c) {
    if (c == rx_cell) continue;
    const CMatrix cross = std::sqrt(rho_f) * channel.block(rx_cell, c).H * P[c] * amplitudes[c].asDiagonal();
    ici += cross.cwiseAbs2().rowwise().sum();
  }
  const RMatrix power = G.cwiseAbs2();
  double rate = 0.0;
  for (Eigen::Index k = 0; k < G.rows(); ++k) {
    const double signal = power(k, k);
    const double leak = power.row(k).sum() - signal + ici(k);
    rate += std::log2(1.0 + signal / (leak + sigma_n_sq));
  }
  return rate;
}

}  // namespace mimosim
