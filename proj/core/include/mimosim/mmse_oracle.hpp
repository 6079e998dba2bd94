#pragma once

#include <cstdint>

#include "mimosim/precoding.hpp"

namespace mimosim {

struct OracleOptions {
  int restarts = 4;
  int max_iterations = 200000;
  /// Stop when the projected-gradient step norm falls below this.
  double tolerance = 1e-10;
  std::uint64_t seed = 0x5eed;
};

struct OracleResult {
  Precoder precoder;
  double mse = 0.0;
  int iterations = 0;
};

/// Brute-force reference for the MMSE precoder: minimizes
/// E|s - f y|^2 over (P, f) subject to tr(P N N^H P^H) <= E_tx by accelerated
/// projected gradient in the convex variables (f P N, f^2), from several
/// random starts. Meant for
/// small dimensions (a few antennas); throws ConvergenceError if no start
/// reaches the tolerance within the iteration cap.
OracleResult mmse_oracle(const CMatrix& H_hat, const RVector& amplitudes, const LinkBudget& budget,
                         const OracleOptions& options = {});

/// The MSE objective evaluated directly from its expectation form.
double oracle_mse(const CMatrix& H, const CMatrix& P, double f, const RVector& amplitudes,
                  const LinkBudget& budget);

}  // namespace mimosim
