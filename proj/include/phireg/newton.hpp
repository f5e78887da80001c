#pragma once

#include "phireg/prox.hpp"
#include "phireg/types.hpp"

namespace phireg {

/// Finite-difference estimate of the envelope-gradient Jacobian near x,
/// symmetrized and eigenvalue-clamped to the nearest positive semidefinite
/// matrix. psd_shift_applied records the clamp magnitude; fd_failed is set
/// when differences came out non-finite and V fell back to zero.
struct CurvatureEstimate {
  Matrix V;
  Vector probe_point;
  double fd_step = 0.0;
  double psd_shift_applied = 0.0;
  bool fd_failed = false;
};

/// Central-difference Jacobian of x -> g_a(x, eps_inner) sampled at
/// x + xi, xi a fixed perturbation of norm fd_step/10 (a generic nearby point
/// where the envelope gradient is likely differentiable). Requires
/// eps_inner <= fd_step^2 * 1e-2 so prox noise cannot swamp the differences.
CurvatureEstimate estimate_curvature(const BenchmarkProblem& problem, const Regularizer& reg,
                                     const Vector& x, double eps_inner, double fd_step,
                                     ProxBackendChoice backend = ProxBackendChoice::automatic,
                                     const BundleOptions& options = {});

/// Solves (V + alpha I) d = -g_a by Cholesky; alpha > 0 and V PSD make the
/// system positive definite and d a strict descent direction for g_a != 0.
Vector newton_direction(const CurvatureEstimate& curvature, double alpha, const Vector& g_a);

struct DampingSchedule {
  enum class Mode { constant, gradient_proportional };
  Mode mode = Mode::gradient_proportional;
  double alpha0 = 1.0;      // constant mode value
  double kappa = 1.0;       // gradient_proportional: alpha = kappa * ||g_a||
  double alpha_min = 0.0;   // floor; 0 lets alpha vanish with the gradient
};

/// Next damping scalar; always > 0 (a positive guard replaces an exact zero).
double next_alpha(const DampingSchedule& schedule, double g_a_norm);

} // namespace phireg
