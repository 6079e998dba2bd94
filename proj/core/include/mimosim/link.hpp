#pragma once

#include <cstdint>
#include <vector>

#include "mimosim/precoding.hpp"
#include "mimosim/random.hpp"
#include "mimosim/scenario.hpp"

namespace mimosim {

using Bits = std::vector<std::uint8_t>;

// Frames are batched column-wise: a stream-dim x F symbol matrix holds F
// channel uses, and the bit vector stores user k of frame j at pair j*K + k.

Bits random_bits(std::size_t count, RandomStream& rng);

/// Gray QPSK: (b0, b1) -> ((1 - 2 b0) + j (1 - 2 b1)) / sqrt(2). Throws
/// std::invalid_argument on an odd bit count.
CVector qpsk_modulate(const Bits& bits);
/// Quadrant decision, inverse of qpsk_modulate.
Bits qpsk_demodulate(const CVector& symbols);

/// Bits for `frames` channel uses of `streams` users, reshaped to
/// streams x frames.
CMatrix qpsk_frame(const Bits& bits, Eigen::Index streams);

/// x = P N s, one column per frame.
CMatrix transmit(const CMatrix& symbols, const CMatrix& P, const RVector& amplitudes);

/// y = sqrt(rho_f) H x + n with n ~ CN(0, sigma_n_sq I).
CMatrix receive(const CMatrix& x, const CMatrix& H, double sigma_n_sq, double rho_f, RandomStream& rng);

/// Multi-cell reception at `rx_cell`: the own-cell signal plus the signal of
/// every other cell through its cross channel, then noise. `x[c]` is cell
/// c's transmit block.
CMatrix receive_cell(const ChannelRealization& channel, int rx_cell, const std::vector<CMatrix>& x,
                     double sigma_n_sq, double rho_f, RandomStream& rng);

/// Per-stream gains, the diagonal of sqrt(rho_f) H P N.
CVector effective_gains(const CMatrix& H, const CMatrix& P, const RVector& amplitudes, double rho_f);

struct Detection {
  Bits bits;
  /// Streams whose gain was zero; their bits are all counted as errors.
  std::vector<bool> failed;
};

/// Genie-aided coherent detection: y_k * f / g_k then a quadrant decision.
/// Requires f > 0.
Detection detect(const CMatrix& y, const CVector& gains, double f);

struct BitCount {
  std::uint64_t errors = 0;
  std::uint64_t total = 0;
};

/// Hamming distance; throws std::invalid_argument on length mismatch.
BitCount ber_count(const Bits& tx, const Bits& rx);
/// As above, with every bit of a failed stream counted as an error.
BitCount ber_count(const Bits& tx, const Detection& rx);

/// Sum over streams of log2(1 + SINR_k) for G = sqrt(rho_f) H P N.
double sum_rate(const CMatrix& H, const CMatrix& P, const RVector& amplitudes, double rho_f,
                double sigma_n_sq);

/// Multi-cell sum rate of `rx_cell`'s streams, with other cells' precoded
/// signals counted as interference.
double sum_rate_cell(const ChannelRealization& channel, int rx_cell, const std::vector<CMatrix>& P,
                     const std::vector<RVector>& amplitudes, double rho_f, double sigma_n_sq);

}  // namespace mimosim
