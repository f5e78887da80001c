#include "phireg/newton.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace phireg {

namespace {
constexpr double kCurvatureNoiseSafety = 1e-2;  // eps_inner <= fd_step^2 * this
} // namespace

CurvatureEstimate estimate_curvature(const BenchmarkProblem& problem, const Regularizer& reg,
                                     const Vector& x, double eps_inner, double fd_step,
                                     ProxBackendChoice backend, const BundleOptions& options) {
  if (!(fd_step > 0.0)) throw std::invalid_argument("estimate_curvature: fd_step must be > 0");
  if (!(eps_inner > 0.0) || eps_inner > fd_step * fd_step * kCurvatureNoiseSafety * (1.0 + 1e-12))
    throw std::invalid_argument(
        "estimate_curvature: eps_inner must lie in (0, fd_step^2 * 1e-2]");

  const Eigen::Index n = x.size();
  CurvatureEstimate est;
  est.fd_step = fd_step;
  // fixed generic offset: differentiability points of the envelope gradient
  // are dense, so a deterministic nudge lands on one in practice
  est.probe_point = x + Vector::Constant(n, fd_step / (10.0 * std::sqrt(static_cast<double>(n))));

  Matrix jac(n, n);
  bool finite = true;
  for (Eigen::Index j = 0; j < n && finite; ++j) {
    Vector hi = est.probe_point;
    Vector lo = est.probe_point;
    hi[j] += fd_step;
    lo[j] -= fd_step;
    const Vector g_hi = inexact_prox(problem, reg, hi, eps_inner, backend, options).g_a;
    const Vector g_lo = inexact_prox(problem, reg, lo, eps_inner, backend, options).g_a;
    jac.col(j) = (g_hi - g_lo) / (2.0 * fd_step);
    finite = jac.col(j).allFinite();
  }
  if (!finite) {
    est.V = Matrix::Zero(n, n);
    est.fd_failed = true;
    return est;
  }

  Matrix sym = 0.5 * (jac + jac.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  Vector vals = eig.eigenvalues();
  est.psd_shift_applied = std::max(0.0, -vals.minCoeff());
  for (Eigen::Index i = 0; i < n; ++i) vals[i] = std::max(vals[i], 0.0);
  est.V = eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().transpose();
  est.V = 0.5 * (est.V + est.V.transpose());
  return est;
}

Vector newton_direction(const CurvatureEstimate& curvature, double alpha, const Vector& g_a) {
  if (!(alpha > 0.0)) throw std::invalid_argument("newton_direction: alpha must be > 0");
  if (!(g_a.norm() > 0.0)) throw std::invalid_argument("newton_direction: zero gradient");
  Matrix system = curvature.V;
  system.diagonal().array() += alpha;
  Eigen::LLT<Matrix> llt(system);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("newton_direction: factorization of V + alpha I failed");
  return llt.solve(-g_a);
}

double next_alpha(const DampingSchedule& schedule, double g_a_norm) {
  double alpha = schedule.mode == DampingSchedule::Mode::constant
                     ? schedule.alpha0
                     : std::max(schedule.alpha_min, schedule.kappa * g_a_norm);
  if (!(alpha > 0.0)) alpha = std::numeric_limits<double>::min();  // the step rule needs alpha > 0
  return alpha;
}

} // namespace phireg
