#include "mimosim/power_allocation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mimosim {

namespace {

bool all_finite(const RVector& v) { return v.allFinite(); }

// Solves h(t) = 1 for t >= 0 where
// h(t) = sum_k w_k / (base_k + 2 t d_k)^2 is decreasing, given h(0) > 1.
double solve_row_multiplier(const RVector& w, const RVector& base, const RVector& d, double guess) {
  auto h = [&](double t) { return (w.array() / (base.array() + 2.0 * t * d.array()).square()).sum(); };
  auto dh = [&](double t) {
    return (-4.0 * w.array() * d.array() / (base.array() + 2.0 * t * d.array()).cube()).sum();
  };

  double lo = 0.0;
  double hi = std::max(guess, 1e-3);
  while (h(hi) > 1.0) {
    lo = hi;
    hi *= 4.0;
    if (!std::isfinite(hi)) return lo;
  }
  // Newton on g(t) = h(t)^(-1/2) - 1, which is exactly linear for a single
  // active stream; fall back to bisection whenever a step leaves [lo, hi].
  double t = guess > lo && guess < hi ? guess : 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    const double hv = h(t);
    const double g = 1.0 / std::sqrt(hv) - 1.0;
    if (g < 0.0) lo = t; else hi = t;
    const double dg = -0.5 * std::pow(hv, -1.5) * dh(t);
    double next = dg > 0.0 ? t - g / dg : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 1e-15 * (1.0 + t) || hi - lo <= 1e-15 * (1.0 + hi)) return next;
    t = next;
  }
  return t;
}

AllocationResult run_loop(const SeparableCost& cost, const AntennaLoad& load, const ApaParams& params,
                          ConstraintMode mode) {
  params.validate();
  const Eigen::Index K = load.streams();
  if (cost.linear.size() != K)
    throw std::invalid_argument("power allocation: precoder and constraint dimensions disagree");

  AllocationResult out;
  out.allocation.constraint_mode = mode;
  RVector n = RVector::Constant(K, std::sqrt(params.initial_eta));
  out.cost_trace.reserve(static_cast<std::size_t>(params.T) + 1);
  out.cost_trace.push_back(cost.value(n));

  const double peak = K > 0 ? cost.curvature.maxCoeff() : 0.0;
  RVector step = RVector::Constant(K, params.mu);
  RVector metric;
  if (params.step_rule == StepRule::Normalized) {
    step.setConstant(peak > 0.0 ? params.mu / peak : 0.0);
  } else if (params.step_rule == StepRule::Scaled) {
    if (peak > 0.0) {
      metric = cost.curvature.cwiseMax(1e-12 * peak);
      step = params.mu * metric.cwiseInverse();
    } else {
      step.setZero();
    }
  }

  ConstraintProjector projector(load, metric);
  RVector eta = n.array().square();
  for (int i = 0; i < params.T; ++i) {
    RVector v = (n - step.cwiseProduct(cost.gradient(n))).cwiseMax(0.0);
    v = projector.project(v);
    eta = per_antenna_projection(v.array().square(), load);
    n = eta.cwiseSqrt();
    if (!all_finite(n)) {
      std::ostringstream msg;
      msg << "power allocation diverged at iteration " << i << " with mu=" << params.mu;
      throw ConvergenceError(msg.str());
    }
    out.max_load = std::max(out.max_load, load.max_load(eta));
    const double c = cost.value(n);
    if (c > out.cost_trace.back() + 1e-9 * std::max(1.0, std::abs(out.cost_trace.back())))
      out.monotone = false;
    out.cost_trace.push_back(c);
    ++out.iterations;
  }
  out.allocation.eta = eta;
  return out;
}

}  // namespace

void ApaParams::validate() const {
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw std::invalid_argument("apa.mu must be a non-negative number");
  if (T < 1) throw std::invalid_argument("apa.iterations must be at least 1");
  if (!(sigma_e_sq >= 0.0)) throw std::invalid_argument("apa.sigma_e_sq must be non-negative");
  if (!(initial_eta > 0.0)) throw std::invalid_argument("apa.initial_eta must be positive");
}

AntennaLoad::AntennaLoad(RMatrix delta) : delta_(std::move(delta)) {
  if ((delta_.array() < 0.0).any()) throw std::invalid_argument("antenna load entries must be non-negative");
}

AntennaLoad AntennaLoad::per_antenna(const CMatrix& P, double antenna_limit) {
  return AntennaLoad(P.cwiseAbs2() / antenna_limit);
}

AntennaLoad AntennaLoad::total_power(const CMatrix& P, double e_tx) {
  return AntennaLoad(RMatrix(P.colwise().squaredNorm() / e_tx));
}

AntennaLoad AntennaLoad::for_mode(ConstraintMode mode, const CMatrix& P, const LinkBudget& budget) {
  return mode == ConstraintMode::PerAntenna ? per_antenna(P, budget.antenna_limit)
                                            : total_power(P, budget.e_tx);
}

double AntennaLoad::max_load(const RVector& eta) const {
  return delta_.rows() == 0 ? 0.0 : (delta_ * eta).maxCoeff();
}

PowerAllocation upa(const AntennaLoad& load, ConstraintMode mode) {
  PowerAllocation a;
  a.constraint_mode = mode;
  const double worst = load.rows() == 0 ? 0.0 : load.delta().rowwise().sum().maxCoeff();
  a.eta = RVector::Constant(load.streams(), worst > 0.0 ? 1.0 / worst : 1.0);
  return a;
}

double mse_cost(const CMatrix& H, const CMatrix& P, const RVector& amplitudes, double f,
                const LinkBudget& budget) {
  const auto N = amplitudes.asDiagonal();
  const double sr = std::sqrt(budget.rho_f);
  const CMatrix HPN = H * P * N;
  const Complex streams(static_cast<double>(H.rows()), 0.0);
  const Complex c = streams - f * sr * HPN.trace() - f * sr * HPN.adjoint().trace() +
                    f * f * budget.rho_f * (HPN.adjoint() * HPN).trace() +
                    f * f * budget.noise_trace(H.rows());
  if (std::abs(c.imag()) > 1e-9 * std::max(1.0, std::abs(c.real())))
    throw std::logic_error("mse_cost: non-negligible imaginary residue");
  return c.real();
}

RVector apa_gradient(const CMatrix& H, const CMatrix& P, const RVector& amplitudes, double f,
                     const LinkBudget& budget) {
  const CMatrix PhHh = P.adjoint() * H.adjoint();
  const CMatrix wirtinger = -f * std::sqrt(budget.rho_f) * PhHh +
                            f * f * budget.rho_f * PhHh * H * P * amplitudes.asDiagonal();
  // A real perturbation of N_kk moves the cost by twice the real part of the
  // conjugate derivative.
  return 2.0 * wirtinger.diagonal().real();
}

double robust_cost(const CMatrix& H_hat, const RVector& g_tilde, const CMatrix& P,
                   const RVector& amplitudes, double f, const LinkBudget& budget) {
  const CMatrix PN = P * amplitudes.asDiagonal();
  const double error_term = (PN.adjoint() * g_tilde.asDiagonal() * PN).trace().real();
  return mse_cost(H_hat, P, amplitudes, f, budget) + f * f * budget.rho_f * error_term;
}

RVector robust_gradient(const CMatrix& H_hat, const RVector& g_tilde, const CMatrix& P,
                        const RVector& amplitudes, double f, const LinkBudget& budget) {
  const CMatrix extra = P.adjoint() * g_tilde.asDiagonal() * P * amplitudes.asDiagonal();
  return apa_gradient(H_hat, P, amplitudes, f, budget) +
         2.0 * f * f * budget.rho_f * extra.diagonal().real();
}

RVector per_antenna_projection(RVector eta, const AntennaLoad& load) {
  eta = eta.cwiseMax(0.0);
  const double worst = load.max_load(eta);
  if (worst > 1.0) eta /= worst;
  return eta;
}

ConstraintProjector::ConstraintProjector(const AntennaLoad& load, RVector metric, int max_passes, double tolerance)
    : load_(load), max_passes_(max_passes), tolerance_(tolerance), duals_(RVector::Zero(load.rows())) {
  if (metric.size() == 0) {
    slope_ = load.delta();
  } else {
    if (metric.size() != load.streams() || (metric.array() <= 0.0).any())
      throw std::invalid_argument("projection metric must be positive with one weight per stream");
    slope_ = load.delta() * metric.cwiseInverse().asDiagonal();
  }
}

RVector ConstraintProjector::project(const RVector& amplitudes) {
  const RMatrix& D = load_.delta();
  const RVector v = amplitudes.cwiseMax(0.0);
  const RVector v2 = v.array().square();
  last_passes_ = 0;
  if (duals_.isZero(0.0) && load_.max_load(v2) <= 1.0) return v;

  // Stationarity of 0.5 sum_k w_k (n_k - v_k)^2 + sum_m nu_m (delta_m . n^2 - 1)
  // gives n_k = v_k / den_k with den_k = 1 + 2 sum_m nu_m delta(m, k) / w_k.
  RVector den = RVector::Ones(v.size()) + 2.0 * slope_.transpose() * duals_;
  for (int pass = 0; pass < max_passes_; ++pass) {
    ++last_passes_;
    double change = 0.0;
    for (Eigen::Index m = 0; m < D.rows(); ++m) {
      const RVector d = slope_.row(m).transpose();
      const double nu = duals_(m);
      const RVector base = den - 2.0 * nu * d;
      const RVector w = D.row(m).transpose().cwiseProduct(v2);
      const double h0 = (w.array() / base.array().square()).sum();
      const double next = h0 <= 1.0 ? 0.0 : solve_row_multiplier(w, base, d, nu);
      if (next != nu) {
        const RVector updated = base + 2.0 * next * d;
        change = std::max(change, ((updated - den).cwiseAbs().array() / updated.array()).maxCoeff());
        den = updated;
        duals_(m) = next;
      }
    }
    if (change < tolerance_) break;
  }
  return v.cwiseQuotient(den);
}

SeparableCost SeparableCost::build(const CMatrix& H, const CMatrix& P, double f, const LinkBudget& budget,
                                   const RVector* g_tilde) {
  const CMatrix A = H * P;
  SeparableCost c;
  c.constant = static_cast<double>(H.rows()) + f * f * budget.noise_trace(H.rows());
  c.linear = f * std::sqrt(budget.rho_f) * A.diagonal().real();
  c.curvature = f * f * budget.rho_f * A.colwise().squaredNorm().transpose();
  if (g_tilde != nullptr) {
    const RVector leak = P.cwiseAbs2().transpose() * (*g_tilde);
    c.curvature += f * f * budget.rho_f * leak;
  }
  return c;
}

double SeparableCost::value(const RVector& amplitudes) const {
  return constant - 2.0 * linear.dot(amplitudes) + curvature.dot(amplitudes.cwiseAbs2());
}

RVector SeparableCost::gradient(const RVector& amplitudes) const {
  return 2.0 * (curvature.cwiseProduct(amplitudes) - linear);
}

AllocationResult apa_run(const CMatrix& H, const CMatrix& P, double f, const LinkBudget& budget,
                         const ApaParams& params, ConstraintMode mode) {
  const AntennaLoad load = AntennaLoad::for_mode(mode, P, budget);
  return run_loop(SeparableCost::build(H, P, f, budget), load, params, mode);
}

AllocationResult rapa_run(const CMatrix& H_hat, const RVector& g_tilde, const CMatrix& P, double f,
                          const LinkBudget& budget, const ApaParams& params, ConstraintMode mode) {
  if (g_tilde.size() != P.rows())
    throw std::invalid_argument("rapa: error covariance size does not match transmit antennas");
  const AntennaLoad load = AntennaLoad::for_mode(mode, P, budget);
  return run_loop(SeparableCost::build(H_hat, P, f, budget, &g_tilde), load, params, mode);
}

}  // namespace mimosim
