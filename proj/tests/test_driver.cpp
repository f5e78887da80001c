#include <doctest.h>

#include <cmath>

#include "phireg/driver.hpp"
#include "phireg/oracle.hpp"
#include "phireg/rng.hpp"

using namespace phireg;

TEST_CASE("solves the absolute value from a warm start") {
  const BenchmarkProblem p = make_abs_problem();
  const Regularizer reg = Regularizer::quadratic(1.0);
  Vector x0(1);
  x0[0] = 3.0;
  const SolveResult res = solve(p, reg, x0, SolverConfig{});
  CHECK(res.status == SolveStatus::converged);
  CHECK(std::abs(res.x_final[0]) <= 1e-6);
}

TEST_CASE("immediate stop at a minimizer with tiny eps0") {
  const BenchmarkProblem p = make_l1_problem(4);
  const Regularizer reg = Regularizer::quadratic(1.0);
  SolverConfig cfg;
  cfg.eps0 = 1e-12;
  cfg.eps_tol = 1e-12;
  const SolveResult res = solve(p, reg, *p.known_minimizer, cfg);
  CHECK(res.status == SolveStatus::converged);
  REQUIRE(!res.trace.empty());
  CHECK(res.trace.back().k <= 1);
  CHECK(res.trace.back().g_a_norm <= cfg.grad_tol);
}

TEST_CASE("max_iters = 0 leaves a single stepless record") {
  const BenchmarkProblem p = make_abs_problem();
  const Regularizer reg = Regularizer::quadratic(1.0);
  SolverConfig cfg;
  cfg.max_iters = 0;
  Vector x0(1);
  x0[0] = 2.0;
  const SolveResult res = solve(p, reg, x0, cfg);
  CHECK(res.status == SolveStatus::max_iters);
  REQUIRE(res.trace.size() == 1);
  CHECK_FALSE(res.trace[0].tau.has_value());
  CHECK_FALSE(res.trace[0].gamma_sup.has_value());
  CHECK(res.trace[0].k == 0);
}

TEST_CASE("trace bookkeeping invariants") {
  const BenchmarkProblem p = make_composite_problem(6, 1.0, 424242);
  const Regularizer reg = Regularizer::quadratic(1.0);
  SolverConfig cfg;
  CounterRng rng(127, 1);
  const Vector x0 = rng.uniform_vector(6, -8.0, 8.0);
  const SolveResult res = solve(p, reg, x0, cfg);
  REQUIRE(res.status == SolveStatus::converged);
  REQUIRE(res.trace.size() >= 3);

  for (std::size_t k = 0; k + 1 < res.trace.size(); ++k) {
    const auto& rec = res.trace[k];
    CHECK(res.trace[k + 1].eps < rec.eps);  // strictly decreasing accuracy
    REQUIRE(rec.tau.has_value());
    REQUIRE(rec.h.has_value());
    CHECK(*rec.tau == std::pow(cfg.ga.rho, *rec.h) * cfg.ga.initial_step);
    CHECK(res.trace[k + 1].m <= std::min(rec.m + 1, cfg.ga.window_cap));

    // the acceptance inequality, re-evaluated from stored quantities
    double window_max = -1e300;
    for (int j = 0; j <= rec.m; ++j)
      window_max = std::max(window_max, res.trace[k - static_cast<std::size_t>(j)].f_phi_a);
    const double gd = -(*rec.gamma_sup) * (*rec.direction_norm);
    const double rhs = window_max + (*rec.gamma_k) * (*rec.tau) * gd + rec.eps;
    CHECK(res.trace[k + 1].f_phi_a <= rhs + 1e-12 * std::max(1.0, std::abs(rhs)));
  }

  // merit boundedness: v_k <= v_0 + sum_{i<k} eps_i
  const double v0 = res.trace.front().f_phi_a;
  double eps_sum = 0.0;
  for (std::size_t k = 1; k < res.trace.size(); ++k) {
    eps_sum += res.trace[k - 1].eps;
    CHECK(res.trace[k].f_phi_a <= v0 + eps_sum + 1e-10);
  }
}

TEST_CASE("entire iterate sequence settles below 1e-4 and keeps shrinking") {
  const BenchmarkProblem p = make_composite_problem(10, 1.0, 90202);
  const Regularizer reg = Regularizer::quadratic(1.0);
  CounterRng rng(131, 2);
  const SolveResult res = solve(p, reg, rng.uniform_vector(10, -10.0, 10.0), SolverConfig{});
  REQUIRE(res.status == SolveStatus::converged);

  std::size_t first_small = res.trace.size();
  for (std::size_t k = 0; k < res.trace.size(); ++k) {
    if (*res.trace[k].dist_to_ref < 1e-4) {
      first_small = k;
      break;
    }
  }
  REQUIRE(first_small < res.trace.size());
  for (std::size_t k = first_small; k + 1 < res.trace.size(); ++k)
    CHECK(*res.trace[k + 1].dist_to_ref <= *res.trace[k].dist_to_ref + 1e-12);
}

TEST_CASE("post-hoc audit passes real traces and catches corrupted steps") {
  const BenchmarkProblem p = make_composite_problem(6, 1.0, 626262);
  const Regularizer reg = Regularizer::quadratic(1.0);
  SolverConfig cfg;
  CounterRng rng(137, 3);
  const SolveResult res = solve(p, reg, rng.uniform_vector(6, -8.0, 8.0), cfg);
  REQUIRE(res.status == SolveStatus::converged);

  const AcceptanceCheckReport clean = check_acceptance_posthoc(res.trace, p, reg, cfg);
  CHECK(clean.violations == 0);
  CHECK(clean.steps.size() + 1 == res.trace.size());

  auto corrupted = res.trace;
  for (auto& rec : corrupted) {
    if (rec.tau && *rec.h == 0 && rec.k >= 1) {
      *rec.tau *= 4.0;  // claim a larger step than was accepted
      break;
    }
  }
  const AcceptanceCheckReport flagged = check_acceptance_posthoc(corrupted, p, reg, cfg);
  CHECK(flagged.violations >= 1);
}

TEST_CASE("solver runs on the bundle backend alone") {
  const BenchmarkProblem p = make_max_affine_problem(3, 6, 90101);
  const Regularizer reg = Regularizer::quadratic(1.0);
  SolverConfig cfg;
  cfg.prox_backend = ProxBackendChoice::bundle;
  cfg.grad_tol = 1e-5;
  cfg.eps_tol = 1e-8;
  CounterRng rng(139, 4);
  const SolveResult res = solve(p, reg, rng.uniform_vector(3, -5.0, 5.0), cfg);
  CHECK(res.status == SolveStatus::converged);
  CHECK(p.oracle.value(res.x_final) - (-1.0) <= 1e-4);
}

TEST_CASE("prox failure surfaces as a status with a partial trace") {
  const BenchmarkProblem p = make_composite_problem(8, 1.0, 515151);
  const Regularizer reg = Regularizer::quadratic(1.0);
  SolverConfig cfg;
  cfg.prox_backend = ProxBackendChoice::bundle;
  cfg.bundle.max_cuts = 5;
  cfg.eps0 = 1e-10;  // far below what five cuts can certify
  CounterRng rng(149, 5);
  const SolveResult res = solve(p, reg, rng.uniform_vector(8, 2.0, 4.0), cfg);
  CHECK(res.status == SolveStatus::prox_failure);
  CHECK_FALSE(res.failure_message.empty());
}

TEST_CASE("superlinear epsilon schedule tracks the gradient norm") {
  const BenchmarkProblem p = make_composite_problem(6, 1.0, 828282);
  const Regularizer reg = Regularizer::quadratic(1.0);
  SolverConfig cfg;
  cfg.eps_mode = EpsMode::superlinear;
  cfg.grad_tol = 1e-9;
  cfg.eps_tol = 1e-12;
  CounterRng rng(151, 6);
  const SolveResult res = solve(p, reg, rng.uniform_vector(6, -5.0, 5.0), cfg);
  REQUIRE(res.status == SolveStatus::converged);
  for (std::size_t k = 0; k + 1 < res.trace.size(); ++k) {
    const double cube = cfg.eps_superlinear_eta * std::pow(res.trace[k].g_a_norm, 3);
    CHECK(res.trace[k + 1].eps <= std::max(0.5 * res.trace[k].eps, cube) * (1.0 + 1e-12));
  }
}

TEST_CASE("solver input validation") {
  const BenchmarkProblem p = make_abs_problem();
  const Regularizer reg = Regularizer::quadratic(1.0);
  SolverConfig cfg;
  cfg.eps0 = 0.0;
  Vector x0(1);
  x0[0] = 1.0;
  CHECK_THROWS_AS(solve(p, reg, x0, cfg), std::invalid_argument);
  cfg = SolverConfig{};
  Vector wrong(2);
  wrong.setZero();
  CHECK_THROWS_AS(solve(p, reg, wrong, cfg), std::invalid_argument);
}
