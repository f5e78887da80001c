#include "phireg/regularizer.hpp"

#include <cmath>
#include <stdexcept>

namespace phireg {

Regularizer Regularizer::quadratic(double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("quadratic regularizer: lambda must be > 0");
  Regularizer r;
  r.kind_ = Kind::quadratic;
  r.lambda_ = lambda;
  r.beta_ = 0.5;
  r.lip_L_sq_ = 2.0;
  r.diagonal_ = true;
  return r;
}

Regularizer Regularizer::metric(const Matrix& M, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("metric regularizer: lambda must be > 0");
  if (M.rows() != M.cols() || M.rows() == 0)
    throw std::invalid_argument("metric regularizer: M must be square and nonempty");
  if ((M - M.transpose()).lpNorm<Eigen::Infinity>() > 1e-12 * std::max(1.0, M.lpNorm<Eigen::Infinity>()))
    throw std::invalid_argument("metric regularizer: M must be symmetric");

  Regularizer r;
  r.kind_ = Kind::metric;
  r.lambda_ = lambda;
  r.M_ = 0.5 * (M + M.transpose());
  r.llt_.compute(r.M_);
  if (r.llt_.info() != Eigen::Success)
    throw std::invalid_argument("metric regularizer: M is not positive definite");

  r.diagonal_ = true;
  for (Eigen::Index i = 0; i < M.rows() && r.diagonal_; ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      if (i != j && r.M_(i, j) != 0.0) {
        r.diagonal_ = false;
        break;
      }

  double mu_min, mu_max;
  if (r.diagonal_) {
    // exact extremes for diagonal metrics keeps the certified constants exact
    r.diag_ = r.M_.diagonal();
    mu_min = r.diag_.minCoeff();
    mu_max = r.diag_.maxCoeff();
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(r.M_);
    mu_min = eig.eigenvalues().minCoeff();
    mu_max = eig.eigenvalues().maxCoeff();
  }
  if (!(mu_min > 0.0))
    throw std::invalid_argument("metric regularizer: M is not positive definite");
  r.beta_ = mu_min / 2.0;
  r.lip_L_sq_ = 2.0 * mu_max * mu_max;
  return r;
}

double Regularizer::lip_L() const { return std::sqrt(lip_L_sq_); }

double Regularizer::phi(const Vector& z, const Vector& x) const {
  Vector d = z - x;
  if (kind_ == Kind::quadratic) return 0.5 * d.squaredNorm();
  return 0.5 * d.dot(M_ * d);
}

Vector Regularizer::grad_z(const Vector& z, const Vector& x) const {
  Vector d = z - x;
  if (kind_ == Kind::quadratic) return d;
  return M_ * d;
}

Vector Regularizer::grad_x(const Vector& z, const Vector& x) const { return -grad_z(z, x); }

Vector Regularizer::apply_metric(const Vector& v) const {
  if (kind_ == Kind::quadratic) return v;
  return M_ * v;
}

Vector Regularizer::solve_metric(const Vector& v) const {
  if (kind_ == Kind::quadratic) return v;
  return llt_.solve(v);
}

Vector Regularizer::argmin_linear_plus_phi(const Vector& c, const Vector& x) const {
  return x - lambda_ * solve_metric(c);
}

Regularizer quadratic_regularizer(double lambda) { return Regularizer::quadratic(lambda); }

Regularizer metric_regularizer(const Matrix& M, double lambda) {
  return Regularizer::metric(M, lambda);
}

double lipschitz_of_envelope(const Regularizer& reg) {
  return reg.lip_L_sq() / (4.0 * reg.beta() * reg.lambda());
}

} // namespace phireg
