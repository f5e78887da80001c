#include <doctest.h>

#include <cmath>

#include "phireg/diagnostics.hpp"
#include "phireg/errors.hpp"
#include "phireg/oracle.hpp"
#include "phireg/rng.hpp"

using namespace phireg;

TEST_CASE("optimality residuals vanish at the l1 minimizer") {
  const BenchmarkProblem p = make_l1_problem(4);
  const Regularizer reg = Regularizer::quadratic(1.0);
  const OptimalityReport rep = optimality_report(p, reg, Vector::Zero(4), 1e-7);
  CHECK(rep.max_residual() <= 1e-9);
}

TEST_CASE("optimality residuals of the absolute value away from the minimum") {
  const BenchmarkProblem p = make_abs_problem();
  const Regularizer reg = Regularizer::quadratic(1.0);
  Vector x(1);
  x[0] = 3.0;
  const OptimalityReport rep = optimality_report(p, reg, x, 1e-7);
  CHECK(rep.prox_residual == doctest::Approx(1.0).epsilon(1e-12));      // p = 2
  CHECK(rep.gradient_norm == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.prox_value_gap == doctest::Approx(1.0).epsilon(1e-12));     // f(3) - f(2)
  CHECK(rep.envelope_value_gap == doctest::Approx(0.5).epsilon(1e-12)); // f(3) - 2.5
}

TEST_CASE("optimality residuals vanish at the composite reference point") {
  const BenchmarkProblem p = make_composite_problem(10, 1.0, 90202);
  const Regularizer reg = Regularizer::quadratic(1.0);
  const OptimalityReport rep = optimality_report(p, reg, *p.known_minimizer, 1e-6);
  CHECK(rep.max_residual() <= 1e-6);
}

TEST_CASE("residual thresholds co-occur across a mixed grid") {
  const BenchmarkProblem p = make_l1_problem(3);
  const Regularizer reg = Regularizer::quadratic(1.0);
  CounterRng rng(157, 1);
  // near-minimizer and clearly-away points must classify identically under
  // each residual with thresholds (1e-6, 1e-6, 1e-5, 1e-5)
  for (int i = 0; i < 40; ++i) {
    const bool near = i % 2 == 0;
    Vector x = near ? Vector(1e-8 * rng.unit_vector(3))
                    : Vector(rng.uniform(0.1, 2.0) * rng.unit_vector(3));
    const OptimalityReport rep = optimality_report(p, reg, x, 1e-8);
    const bool a2 = rep.prox_residual <= 1e-6;
    const bool a3 = rep.gradient_norm <= 1e-6;
    const bool a5 = rep.prox_value_gap <= 1e-5;
    const bool a6 = rep.envelope_value_gap <= 1e-5;
    CHECK(a2 == near);
    CHECK(a3 == near);
    CHECK(a5 == near);
    CHECK(a6 == near);
  }
}

TEST_CASE("lipschitz probe on the absolute value") {
  const BenchmarkProblem p = make_abs_problem();

  const auto probe1 = lipschitz_probe(p, Regularizer::quadratic(1.0), 1000, -5.0, 5.0,
                                      CounterRng(163, 2));
  CHECK(probe1.bound == 1.0);
  CHECK(probe1.pass);
  CHECK(probe1.max_ratio <= 1.0 + 1e-9);
  CHECK(probe1.max_ratio >= 0.9);  // the quadratic region attains the bound

  const auto probe4 = lipschitz_probe(p, Regularizer::quadratic(4.0), 1000, -5.0, 5.0,
                                      CounterRng(163, 3));
  CHECK(probe4.bound == 0.25);
  CHECK(probe4.pass);
}

TEST_CASE("degenerate probe pairs are skipped") {
  const BenchmarkProblem p = make_abs_problem();
  const auto probe = lipschitz_probe(p, Regularizer::quadratic(1.0), 10, 2.0, 2.0,
                                     CounterRng(167, 4));
  CHECK(probe.pairs_used == 0);
  CHECK(probe.max_ratio == 0.0);
}

namespace {

std::vector<IterateRecord> trace_from_distances(const std::vector<double>& dists) {
  // embeds the distances on the first axis of a 2-D problem with reference 0
  std::vector<IterateRecord> trace;
  for (std::size_t k = 0; k < dists.size(); ++k) {
    IterateRecord rec;
    rec.k = static_cast<int>(k);
    rec.x = Vector::Zero(2);
    rec.x[0] = dists[k];
    trace.push_back(rec);
  }
  return trace;
}

} // namespace

TEST_CASE("rate report on a synthetic quadratically convergent tail") {
  const std::vector<double> dists{0.9, 0.7, 0.5, 0.3, 1e-1, 1e-2, 1e-4, 1e-8, 1e-16};
  const auto trace = trace_from_distances(dists);
  const RateReport rep = rate_report(trace, Vector::Zero(2));

  REQUIRE(rep.ratios_1step.size() == 8);
  CHECK(rep.ratios_1step[4] == doctest::Approx(1e-1));
  CHECK(rep.ratios_2step.back() == doctest::Approx(1e-16 / 1e-4));
  CHECK(rep.tail_max_2step <= 1e-3);
  // d_{k+1} = d_k^2 on the fit window forces the constant to one
  CHECK(rep.quadratic_constant_estimate == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("rate report rejects degenerate traces") {
  CHECK_THROWS_AS(rate_report(trace_from_distances({0, 0, 0, 0, 0, 0, 0}), Vector::Zero(2)),
                  InsufficientTraceError);
  CHECK_THROWS_AS(rate_report(trace_from_distances({1.0, 0.5, 0.25}), Vector::Zero(2)),
                  InsufficientTraceError);
}

TEST_CASE("linear sequences keep their ratio in the report") {
  std::vector<double> dists;
  double d = 1.0;
  for (int i = 0; i < 20; ++i) {
    dists.push_back(d);
    d *= 0.5;
  }
  const RateReport rep = rate_report(trace_from_distances(dists), Vector::Zero(2));
  for (double r : rep.ratios_1step) CHECK(r == doctest::Approx(0.5));
  CHECK(rep.tail_max_2step == doctest::Approx(0.25));
}

TEST_CASE("curvature floor probe on the composite problem") {
  const BenchmarkProblem p = make_composite_problem(6, 1.0, 90210);
  const Regularizer reg = Regularizer::quadratic(1.0);
  const double floor =
      bd_regularity_probe(p, reg, *p.known_minimizer, 5, 1e-3, CounterRng(173, 5));
  CHECK(floor > 0.0);
}

TEST_CASE("curvature probe on the kinked absolute value stays in range") {
  const BenchmarkProblem p = make_abs_problem();
  const Regularizer reg = Regularizer::quadratic(1.0);
  const double probe =
      bd_regularity_probe(p, reg, Vector::Zero(1), 8, 0.5, CounterRng(179, 6));
  CHECK(probe >= -1e-6);
  CHECK(probe <= 1.0 + 1e-6);

  // radius zero degenerates to a single-point probe
  const double single =
      bd_regularity_probe(p, reg, Vector::Zero(1), 1, 0.0, CounterRng(179, 7));
  CHECK(single == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("lemma2 grid runs clean on a small problem") {
  const BenchmarkProblem p = make_maxq_problem(2);
  const Regularizer reg = Regularizer::quadratic(1.0);
  const auto grid = lemma2_grid(p, reg, {1e-1, 1e-4}, 15, 5.0, CounterRng(181, 8));
  CHECK(grid.checks == 30);
  CHECK(grid.violations == 0);
  CHECK(grid.worst_point_margin <= 0.0);
  CHECK(grid.worst_grad_margin <= 0.0);
}
