#pragma once

#include <vector>

#include "phireg/driver.hpp"
#include "phireg/regularizer.hpp"
#include "phireg/rng.hpp"
#include "phireg/types.hpp"

namespace phireg {

/// Residuals of the equivalent optimality characterizations at a point:
/// all vanish exactly at a minimizer of f and are bounded away from zero
/// elsewhere.
struct OptimalityReport {
  Vector x;
  double prox_residual = 0.0;      // ||p(x) - x||
  double gradient_norm = 0.0;      // ||grad f_phi(x)||
  double prox_value_gap = 0.0;     // |f(x) - f(p(x))|
  double envelope_value_gap = 0.0; // |f(x) - f_phi(x)|
  double max_residual() const;
};

/// Computes the four residuals from an exact envelope evaluation at accuracy
/// tol*1e-2.
OptimalityReport optimality_report(const BenchmarkProblem& problem, const Regularizer& reg,
                                   const Vector& x, double tol);

/// Samples pairs in [box_lo, box_hi]^n and compares the worst observed
/// envelope-gradient difference quotient against L^2/(4 beta lambda).
struct LipschitzProbeResult {
  double max_ratio = 0.0;
  double bound = 0.0;
  int pairs_used = 0;
  bool pass = false;  // max_ratio <= bound * (1 + 1e-6)
};

LipschitzProbeResult lipschitz_probe(const BenchmarkProblem& problem, const Regularizer& reg,
                                     int n_pairs, double box_lo, double box_hi,
                                     CounterRng rng);

/// Convergence-rate statistics of a trace against a reference minimizer.
/// Two-step ratios are the primary statistic; the quadratic constant is the
/// least-squares fit of ||x^{k+1}-ref|| <= C ||x^k-ref||^2 on log-distances
/// over records with distance in [1e-9, 1e-2].
struct RateReport {
  std::vector<double> ratios_1step;
  std::vector<double> ratios_2step;
  double tail_max_2step = 0.0;             // max of the last 3 two-step ratios
  double quadratic_constant_estimate = 0.0; // NaN when no records fall in the fit range
};

/// Throws InsufficientTraceError when fewer than 6 records are usable
/// (positive distance above the measurement floor).
RateReport rate_report(const std::vector<IterateRecord>& trace, const Vector& x_ref);

/// Smallest Rayleigh quotient of sampled curvature estimates within `radius`
/// of x_ref over random directions. A positive value is numerical evidence
/// that every nearby envelope-gradient Jacobian has a curvature floor.
double bd_regularity_probe(const BenchmarkProblem& problem, const Regularizer& reg,
                           const Vector& x_ref, int n_samples, double radius,
                           CounterRng rng);

/// Sampled verification of the defining regularizer properties: nonnegativity
/// with zero exactly on the diagonal, strong convexity in the difference
/// direction with modulus beta, gradient Lipschitz continuity with constant L,
/// antisymmetric partials, and agreement of the analytic gradients with
/// central differences.
struct RegularizerPropertyReport {
  double nonneg_min = 0.0;             // min sampled phi; >= 0 required
  double offdiag_phi_min = 0.0;        // min phi over z != x; must stay positive
  double diagonal_phi_max = 0.0;       // max |phi(x,x)|
  double strong_convexity_worst = 0.0; // min inequality residual over quadruples
  double lipschitz_excess_worst = 0.0; // max (||dgrad|| - L ||ddiff||)
  double antisymmetry_worst = 0.0;     // max ||grad_z + grad_x||
  double grad_fd_rel_error = 0.0;      // worst relative finite-difference mismatch
  bool pass(double slack, double fd_tol) const;
};

RegularizerPropertyReport check_regularizer_properties(const Regularizer& reg, int dimension,
                                                       int n_quadruples, double box,
                                                       CounterRng rng);

/// Bundle certificates checked against exact envelopes over an epsilon grid
/// and random points in [-box, box]^n.
struct Lemma2GridReport {
  int checks = 0;
  int violations = 0;
  double worst_value_low_slack = 0.0;
  double worst_value_high_slack = 0.0;
  double worst_point_margin = 0.0;  // max (dist - bound), negative when all hold
  double worst_grad_margin = 0.0;
};

Lemma2GridReport lemma2_grid(const BenchmarkProblem& problem, const Regularizer& reg,
                             const std::vector<double>& epsilons, int n_points, double box,
                             CounterRng rng, const BundleOptions& options = {});

} // namespace phireg
