#include "mimosim/mmse_oracle.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "mimosim/random.hpp"

namespace mimosim {

namespace {

// With W = f Q (Q = P N) and t = f^2 the objective
//   K - 2 sqrt(rho) Re tr(H W) + rho ||H W||^2 + t tr(C_n)
// is convex and the power constraint becomes ||W||^2 <= E_tx t, also convex.
struct Problem {
  const CMatrix& H;
  double sqrt_rho;
  double rho;
  double noise;
  double e_tx;
  double streams;

  double cost(const CMatrix& W, double t) const {
    const CMatrix HW = H * W;
    return streams - 2.0 * sqrt_rho * HW.trace().real() + rho * HW.squaredNorm() + t * noise;
  }

  // Gradient with respect to (Re W, Im W) packed as a complex matrix.
  CMatrix gradient(const CMatrix& W) const {
    return -2.0 * sqrt_rho * H.adjoint() + 2.0 * rho * (H.adjoint() * (H * W));
  }

  // Euclidean projection onto {(W, t) : ||W||^2 <= e_tx t}.
  void project(CMatrix& W, double& t) const {
    const double w2 = W.squaredNorm();
    if (w2 <= e_tx * t) return;
    // W = W0 / (1 + l / e_tx), t = t0 + l / 2 with l solving the boundary equation.
    auto excess = [&](double l) { return w2 / (e_tx * std::pow(1.0 + l / e_tx, 2)) - t - 0.5 * l; };
    double lo = 0.0, hi = 1.0;
    while (excess(hi) > 0.0) hi *= 2.0;
    for (int i = 0; i < 200 && hi - lo > 1e-16 * hi; ++i) {
      const double mid = 0.5 * (lo + hi);
      (excess(mid) > 0.0 ? lo : hi) = mid;
    }
    const double l = 0.5 * (lo + hi);
    W /= 1.0 + l / e_tx;
    t += 0.5 * l;
  }
};

}  // namespace

double oracle_mse(const CMatrix& H, const CMatrix& P, double f, const RVector& amplitudes,
                  const LinkBudget& budget) {
  // E|s|^2 - 2 f Re E[s^H y] + f^2 E|y|^2 with C_s = I.
  const CMatrix G = std::sqrt(budget.rho_f) * H * P * amplitudes.asDiagonal();
  const double e_ss = static_cast<double>(H.rows());
  const double e_sy = G.trace().real();
  const double e_yy = G.squaredNorm() + budget.noise_trace(H.rows());
  return e_ss - 2.0 * f * e_sy + f * f * e_yy;
}

OracleResult mmse_oracle(const CMatrix& H_hat, const RVector& amplitudes, const LinkBudget& budget,
                         const OracleOptions& options) {
  budget.validate();
  if ((amplitudes.array() <= 0.0).any())
    throw std::domain_error("oracle: power allocation must be strictly positive");

  const Problem prob{H_hat,
                     std::sqrt(budget.rho_f),
                     budget.rho_f,
                     budget.noise_trace(H_hat.rows()),
                     budget.e_tx,
                     static_cast<double>(H_hat.rows())};

  OracleResult best;
  best.mse = std::numeric_limits<double>::infinity();
  bool any_converged = false;
  const RandomStream root(options.seed);
  const Eigen::JacobiSVD<CMatrix> svd(H_hat);
  const double lipschitz = 2.0 * budget.rho_f * std::pow(svd.singularValues()(0), 2);
  const double step = lipschitz > 0.0 ? 1.0 / lipschitz : 1.0;

  for (int r = 0; r < options.restarts; ++r) {
    RandomStream rng = root.child(static_cast<std::uint64_t>(r));
    CMatrix W = rng.complex_normal_matrix(H_hat.cols(), H_hat.rows());
    double t = W.squaredNorm() / budget.e_tx;
    // FISTA with function-value restarts.
    CMatrix W_prev = W, Y = W;
    double t_prev = t, s = t, momentum = 1.0;
    double c = prob.cost(W, t);
    bool converged = false;
    int it = 0;
    for (; it < options.max_iterations; ++it) {
      CMatrix W_next = Y - step * prob.gradient(Y);
      double t_next = s - step * prob.noise;
      prob.project(W_next, t_next);
      const double mapping = std::sqrt((W_next - Y).squaredNorm() + std::pow(t_next - s, 2)) / step;
      const double c_next = prob.cost(W_next, t_next);
      if (c_next > c && momentum > 1.0) {
        // Restart from the last iterate without momentum.
        momentum = 1.0;
        Y = W;
        s = t;
        continue;
      }
      const double m_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
      const double beta = (momentum - 1.0) / m_next;
      W_prev = W;
      t_prev = t;
      W = W_next;
      t = t_next;
      c = c_next;
      Y = W + beta * (W - W_prev);
      s = t + beta * (t - t_prev);
      momentum = m_next;
      if (mapping < options.tolerance) {
        converged = true;
        break;
      }
    }
    if (!converged || !(t > 0.0)) continue;
    any_converged = true;
    if (c < best.mse) {
      const double f = std::sqrt(t);
      best.mse = c;
      best.iterations = it;
      best.precoder.kind = PrecoderKind::MMSE;
      best.precoder.P = (W / f) * amplitudes.cwiseInverse().asDiagonal();
      best.precoder.f = f;
      best.precoder.scale = 1.0;
    }
  }
  if (!any_converged)
  {
    std::ostringstream msg;
    msg << "MMSE oracle: no start reached tolerance " << options.tolerance << " within "
        << options.max_iterations << " iterations";
    throw ConvergenceError(msg.str());
  }
  return best;
}

}  // namespace mimosim
