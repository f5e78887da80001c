#pragma once

#include "phireg/oracle.hpp"
#include "phireg/types.hpp"

namespace phireg {

/// Bivariate coupling phi(z, x) used to build the smoothed objective
///   f_phi(x) = min_z { f(z) + phi(z, x)/lambda }.
/// Two families: quadratic phi(z,x) = ||z-x||^2/2 and metric
/// phi(z,x) = (z-x)' M (z-x)/2 with M symmetric positive definite.
///
/// beta and L are certified constants supplied by the constructors, not
/// runtime estimates: beta is the strong-convexity modulus in the difference
/// direction, L the Lipschitz constant of the stacked gradient. L^2 is stored
/// exactly since the envelope bounds use L^2 rather than L.
class Regularizer {
public:
  enum class Kind { quadratic, metric };

  /// phi(z,x) = ||z-x||^2/2, beta = 1/2, L = sqrt(2). Throws on lambda <= 0.
  static Regularizer quadratic(double lambda);

  /// phi(z,x) = (z-x)'M(z-x)/2, beta = mu_min/2, L = sqrt(2)*mu_max.
  /// Throws on lambda <= 0, asymmetric M, or M not positive definite.
  static Regularizer metric(const Matrix& M, double lambda);

  Kind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  double beta() const { return beta_; }
  double lip_L_sq() const { return lip_L_sq_; }
  double lip_L() const;
  bool has_diagonal_metric() const { return diagonal_; }
  /// Diagonal of M; valid for quadratic (all ones implicit) and diagonal metric.
  const Vector& metric_diagonal() const { return diag_; }
  const Matrix& metric_matrix() const { return M_; }

  double phi(const Vector& z, const Vector& x) const;
  Vector grad_z(const Vector& z, const Vector& x) const;
  Vector grad_x(const Vector& z, const Vector& x) const;

  Vector apply_metric(const Vector& v) const;  // M v   (v itself for quadratic)
  Vector solve_metric(const Vector& v) const;  // M^{-1} v

  /// argmin_z { c'z + phi(z,x)/lambda } = x - lambda * M^{-1} c. This is the
  /// subproblem the bundle backend solves for each aggregated cut gradient.
  Vector argmin_linear_plus_phi(const Vector& c, const Vector& x) const;

private:
  Regularizer() = default;

  Kind kind_ = Kind::quadratic;
  double lambda_ = 1.0;
  double beta_ = 0.5;
  double lip_L_sq_ = 2.0;
  bool diagonal_ = true;
  Vector diag_;                  // diagonal entries when diagonal_
  Matrix M_;                     // empty for quadratic
  Eigen::LLT<Matrix> llt_;       // factor of M for the metric family
};

Regularizer quadratic_regularizer(double lambda);
Regularizer metric_regularizer(const Matrix& M, double lambda);

/// Lipschitz constant of the envelope gradient, c = L^2 / (4 beta lambda).
double lipschitz_of_envelope(const Regularizer& reg);

struct EnvelopeValue {
  double f_phi = 0.0;  // envelope value f_phi(x)
  Vector p;            // the unique inner minimizer p(x)
  Vector grad;         // grad f_phi(x) = grad_x phi(p, x)/lambda
};

/// Envelope value/minimizer/gradient at x, certified to objective gap <= tol.
/// Uses the problem's exact prox when available (gap 0), otherwise the bundle
/// backend at accuracy tol. Throws ProxFailureError if tol cannot be certified.
EnvelopeValue exact_envelope(const BenchmarkProblem& problem, const Regularizer& reg,
                             const Vector& x, double tol = 1e-9);

} // namespace phireg
