#include <doctest.h>

#include <cmath>
#include <limits>

#include "phireg/newton.hpp"
#include "phireg/oracle.hpp"
#include "phireg/rng.hpp"

using namespace phireg;

TEST_CASE("direction solves the damped system") {
  CurvatureEstimate zero;
  zero.V = Matrix::Zero(2, 2);
  Vector g(2);
  g << 2.0, -4.0;
  Vector d = newton_direction(zero, 1.0, g);
  CHECK(d[0] == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(d[1] == doctest::Approx(4.0).epsilon(1e-14));

  CurvatureEstimate diag;
  diag.V = Matrix::Zero(2, 2);
  diag.V(0, 0) = 1.0;
  diag.V(1, 1) = 3.0;
  g << 2.0, 4.0;
  d = newton_direction(diag, 1.0, g);
  CHECK(d[0] == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(d[1] == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("directions are strict descent for any PSD curvature") {
  CounterRng rng(109, 1);
  for (int i = 0; i < 1000; ++i) {
    Matrix A(3, 3);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) A(r, c) = rng.normal();
    CurvatureEstimate est;
    est.V = A.transpose() * A;
    est.V = 0.5 * (est.V + est.V.transpose());
    const double alpha = rng.uniform(1e-6, 2.0);
    Vector g = rng.normal_vector(3);
    if (g.norm() == 0.0) continue;
    Vector d = newton_direction(est, alpha, g);
    CHECK(g.dot(d) < 0.0);
  }
}

TEST_CASE("curvature estimate recovers the smooth-envelope Jacobian") {
  // for f(x) = x'Qx/2 the envelope gradient is linear with slope Q(I+lambda Q)^{-1}
  Matrix Q(3, 3);
  Q << 2.0, 0.3, 0.0, 0.3, 1.5, 0.2, 0.0, 0.2, 1.0;
  Vector b = Vector::Zero(3);
  const BenchmarkProblem p = make_quadratic_problem(Q, b);
  for (double lambda : {0.5, 1.0}) {
    const Regularizer reg = Regularizer::quadratic(lambda);
    const Matrix expected =
        Q * (Matrix::Identity(3, 3) + lambda * Q).inverse();
    CounterRng rng(113, 2);
    Vector x = rng.uniform_vector(3, -2.0, 2.0);
    const double fd = 1e-4;
    const CurvatureEstimate est = estimate_curvature(p, reg, x, fd * fd * 1e-2, fd);
    CHECK((est.V - expected).cwiseAbs().maxCoeff() <= 1e-4);
    CHECK(est.psd_shift_applied <= 1e-10);
    CHECK((est.V - est.V.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("piecewise envelope curvature of the absolute value") {
  const BenchmarkProblem p = make_abs_problem();
  const Regularizer reg = Regularizer::quadratic(1.0);
  const double fd = 1e-4;

  Vector x(1);
  x[0] = 3.0;  // envelope gradient is constant here
  CurvatureEstimate est = estimate_curvature(p, reg, x, fd * fd * 1e-2, fd);
  CHECK(std::abs(est.V(0, 0)) <= 1e-8);

  x[0] = 0.5;  // quadratic region: slope 1/lambda = 1
  est = estimate_curvature(p, reg, x, fd * fd * 1e-2, fd);
  CHECK(est.V(0, 0) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("curvature estimate rejects incompatible accuracy settings") {
  const BenchmarkProblem p = make_abs_problem();
  const Regularizer reg = Regularizer::quadratic(1.0);
  Vector x(1);
  x[0] = 1.0;
  CHECK_THROWS_AS(estimate_curvature(p, reg, x, 1e-3, 1e-4), std::invalid_argument);
  CHECK_THROWS_AS(estimate_curvature(p, reg, x, 1e-12, 0.0), std::invalid_argument);
}

TEST_CASE("non-finite differences fall back to a zero curvature") {
  BenchmarkProblem broken = make_abs_problem();
  broken.closed_form_prox = [](const Vector& x, const Regularizer&) -> std::optional<Vector> {
    Vector z(1);
    z[0] = x[0] > 0.125 ? std::numeric_limits<double>::quiet_NaN() : 0.0;
    return z;
  };
  const Regularizer reg = Regularizer::quadratic(1.0);
  Vector x(1);
  x[0] = 0.125;
  const CurvatureEstimate est = estimate_curvature(broken, reg, x, 1e-12, 1e-4);
  CHECK(est.fd_failed);
  CHECK(est.V(0, 0) == 0.0);
}

TEST_CASE("damping schedule modes") {
  DampingSchedule constant;
  constant.mode = DampingSchedule::Mode::constant;
  constant.alpha0 = 0.1;
  CHECK(next_alpha(constant, 5.0) == 0.1);
  CHECK(next_alpha(constant, 0.0) == 0.1);

  DampingSchedule proportional;
  proportional.mode = DampingSchedule::Mode::gradient_proportional;
  proportional.kappa = 1.0;
  proportional.alpha_min = 0.0;
  CHECK(next_alpha(proportional, 1e-3) == 1e-3);
  CHECK(next_alpha(proportional, 0.0) > 0.0);  // positivity guard

  proportional.alpha_min = 1e-4;
  CHECK(next_alpha(proportional, 1e-6) == 1e-4);
}
