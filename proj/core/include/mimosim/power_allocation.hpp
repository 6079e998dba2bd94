#pragma once

#include <vector>

#include "mimosim/precoding.hpp"
#include "mimosim/types.hpp"

namespace mimosim {

enum class ConstraintMode { TotalPower, PerAntenna };

/// Per-stream power coefficients eta_k; the allocation matrix is
/// N = diag(sqrt(eta)).
struct PowerAllocation {
  RVector eta;
  ConstraintMode constraint_mode = ConstraintMode::TotalPower;

  RVector amplitudes() const { return eta.cwiseMax(0.0).cwiseSqrt(); }
};

enum class StepRule {
  Fixed,       // literal N <- N - mu * grad, Euclidean projection
  Normalized,  // mu divided by the largest per-stream curvature
  Scaled,      // per-stream mu / curvature_k, projection in that metric
};

struct ApaParams {
  double mu = 0.5;
  int T = 200;
  double sigma_e_sq = 0.0;
  StepRule step_rule = StepRule::Scaled;
  double initial_eta = 1e-3;

  void validate() const;
};

/// Linear power constraints on eta: row m of `delta` must satisfy
/// delta_m . eta <= 1. Per-antenna mode has one row per transmit antenna,
/// delta(m, k) = |P_mk|^2 / antenna_limit; total-power mode has the single
/// row ||P_k||^2 / E_tx.
class AntennaLoad {
 public:
  AntennaLoad() = default;
  explicit AntennaLoad(RMatrix delta);

  static AntennaLoad per_antenna(const CMatrix& P, double antenna_limit);
  static AntennaLoad total_power(const CMatrix& P, double e_tx);
  static AntennaLoad for_mode(ConstraintMode mode, const CMatrix& P, const LinkBudget& budget);

  const RMatrix& delta() const { return delta_; }
  Eigen::Index streams() const { return delta_.cols(); }
  Eigen::Index rows() const { return delta_.rows(); }

  RVector loads(const RVector& eta) const { return delta_ * eta; }
  double max_load(const RVector& eta) const;

 private:
  RMatrix delta_;
};

/// Equal eta for every stream at the largest value the constraints allow.
PowerAllocation upa(const AntennaLoad& load, ConstraintMode mode);

/// MSE cost evaluated term by term:
/// tr(C_s) - 2 f sqrt(rho) Re tr(H P N) + f^2 rho tr(N^H P^H H^H H P N) + f^2 tr(C_n).
double mse_cost(const CMatrix& H, const CMatrix& P, const RVector& amplitudes, double f,
                const LinkBudget& budget);

/// Derivative of mse_cost with respect to each diagonal entry of N: twice
/// the real diagonal of -f sqrt(rho) P^H H^H + f^2 rho P^H H^H H P N.
RVector apa_gradient(const CMatrix& H, const CMatrix& P, const RVector& amplitudes, double f,
                     const LinkBudget& budget);

/// mse_cost on the estimate plus the error term f^2 rho tr(N^H P^H G P N),
/// with `g_tilde` the diagonal of E[H_tilde^H H_tilde]. Equals the average
/// of mse_cost over the error distribution.
double robust_cost(const CMatrix& H_hat, const RVector& g_tilde, const CMatrix& P,
                   const RVector& amplitudes, double f, const LinkBudget& budget);

/// apa_gradient on the estimate plus 2 f^2 rho Re diag(P^H G P N).
RVector robust_gradient(const CMatrix& H_hat, const RVector& g_tilde, const CMatrix& P,
                        const RVector& amplitudes, double f, const LinkBudget& budget);

/// Clamps negative entries to zero, then scales eta uniformly so the most
/// loaded row binds when any row exceeds 1.
RVector per_antenna_projection(RVector eta, const AntennaLoad& load);

/// Projection of an amplitude vector onto
/// {n >= 0 : sum_k delta(m, k) n_k^2 <= 1 for all m}, minimizing
/// sum_k w_k (n_k - v_k)^2 for positive weights w (Euclidean when empty).
///
/// Solved by exact coordinate ascent on the Lagrange dual (one multiplier
/// per row, each updated by a safeguarded Newton solve). Multipliers are
/// kept between calls so consecutive projections of nearby points are
/// cheap.
class ConstraintProjector {
 public:
  explicit ConstraintProjector(const AntennaLoad& load, RVector metric = {}, int max_passes = 1000,
                               double tolerance = 1e-13);

  RVector project(const RVector& amplitudes);
  int last_passes() const { return last_passes_; }

 private:
  const AntennaLoad& load_;
  RMatrix slope_;  // delta(m, k) / w_k
  int max_passes_;
  double tolerance_;
  RVector duals_;
  int last_passes_ = 0;
};

/// The cost restricted to a diagonal N is separable:
/// C(n) = constant - 2 sum_k linear_k n_k + sum_k curvature_k n_k^2.
struct SeparableCost {
  double constant = 0.0;
  RVector linear;
  RVector curvature;

  static SeparableCost build(const CMatrix& H, const CMatrix& P, double f, const LinkBudget& budget,
                             const RVector* g_tilde = nullptr);

  double value(const RVector& amplitudes) const;
  RVector gradient(const RVector& amplitudes) const;
};

struct AllocationResult {
  PowerAllocation allocation;
  /// Cost after each iteration (index 0 holds the initial cost).
  std::vector<double> cost_trace;
  /// Largest row load seen after any iteration's projection.
  double max_load = 0.0;
  bool monotone = true;
  int iterations = 0;
};

/// Stochastic-gradient power allocation on a fixed precoder: starts every
/// eta_k at `initial_eta`, then repeats T times: gradient step on N, keep
/// the non-negative diagonal, project onto the constraints, enforce
/// feasibility with per_antenna_projection. Throws ConvergenceError on
/// non-finite iterates.
AllocationResult apa_run(const CMatrix& H, const CMatrix& P, double f, const LinkBudget& budget,
                         const ApaParams& params, ConstraintMode mode);

/// Same loop driven by the robust cost; with a zero `g_tilde` the iterates
/// are bitwise identical to apa_run on H_hat.
AllocationResult rapa_run(const CMatrix& H_hat, const RVector& g_tilde, const CMatrix& P, double f,
                          const LinkBudget& budget, const ApaParams& params, ConstraintMode mode);

}  // namespace mimosim
