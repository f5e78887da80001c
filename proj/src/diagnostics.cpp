#include "phireg/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "phireg/errors.hpp"

namespace phireg {

namespace {
// distances below this are dominated by reference-minimizer error and are
// excluded from ratio statistics
constexpr double kDistFloor = 1e-10;
} // namespace

double OptimalityReport::max_residual() const {
  return std::max({prox_residual, gradient_norm, prox_value_gap, envelope_value_gap});
}

OptimalityReport optimality_report(const BenchmarkProblem& problem, const Regularizer& reg,
                                   const Vector& x, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("optimality_report: tol must be > 0");
  EnvelopeValue env = exact_envelope(problem, reg, x, tol * 1e-2);
  const double fx = problem.oracle.value(x);
  OptimalityReport report;
  report.x = x;
  report.prox_residual = (env.p - x).norm();
  report.gradient_norm = env.grad.norm();
  report.prox_value_gap = std::abs(fx - problem.oracle.value(env.p));
  report.envelope_value_gap = std::abs(fx - env.f_phi);
  return report;
}

LipschitzProbeResult lipschitz_probe(const BenchmarkProblem& problem, const Regularizer& reg,
                                     int n_pairs, double box_lo, double box_hi, CounterRng rng) {
  if (n_pairs < 1) throw std::invalid_argument("lipschitz_probe: n_pairs must be >= 1");
  const int n = problem.oracle.dimension;
  LipschitzProbeResult result;
  result.bound = lipschitz_of_envelope(reg);
  for (int i = 0; i < n_pairs; ++i) {
    Vector a = rng.uniform_vector(n, box_lo, box_hi);
    Vector b = rng.uniform_vector(n, box_lo, box_hi);
    const double dist = (a - b).norm();
    if (dist == 0.0) continue;  // degenerate pair, skip
    Vector ga = exact_envelope(problem, reg, a).grad;
    Vector gb = exact_envelope(problem, reg, b).grad;
    result.max_ratio = std::max(result.max_ratio, (ga - gb).norm() / dist);
    ++result.pairs_used;
  }
  result.pass = result.max_ratio <= result.bound * (1.0 + 1e-6);
  return result;
}

RateReport rate_report(const std::vector<IterateRecord>& trace, const Vector& x_ref) {
  std::vector<double> dist;
  dist.reserve(trace.size());
  for (const IterateRecord& rec : trace) dist.push_back((rec.x - x_ref).norm());

  int usable = 0;
  for (double d : dist)
    if (d >= kDistFloor) ++usable;
  if (usable < 6)
    throw InsufficientTraceError("rate_report: fewer than 6 records above the distance floor");

  RateReport report;
  for (std::size_t k = 0; k + 1 < dist.size(); ++k)
    if (dist[k] >= kDistFloor) report.ratios_1step.push_back(dist[k + 1] / dist[k]);
  for (std::size_t k = 0; k + 2 < dist.size(); ++k)
    if (dist[k] >= kDistFloor) report.ratios_2step.push_back(dist[k + 2] / dist[k]);

  report.tail_max_2step = 0.0;
  const std::size_t tail = std::min<std::size_t>(3, report.ratios_2step.size());
  for (std::size_t i = report.ratios_2step.size() - tail; i < report.ratios_2step.size(); ++i)
    report.tail_max_2step = std::max(report.tail_max_2step, report.ratios_2step[i]);

  // least-squares fit of log d_{k+1} = log C + 2 log d_k over the window
  double sum = 0.0;
  int count = 0;
  for (std::size_t k = 0; k + 1 < dist.size(); ++k) {
    if (dist[k] >= 1e-9 && dist[k] <= 1e-2 && dist[k + 1] > 0.0) {
      sum += std::log(dist[k + 1]) - 2.0 * std::log(dist[k]);
      ++count;
    }
  }
  report.quadratic_constant_estimate =
      count > 0 ? std::exp(sum / count) : std::numeric_limits<double>::quiet_NaN();
  return report;
}

bool RegularizerPropertyReport::pass(double slack, double fd_tol) const {
  return nonneg_min >= 0.0 && offdiag_phi_min > 0.0 && diagonal_phi_max <= slack &&
         strong_convexity_worst >= -slack && lipschitz_excess_worst <= slack &&
         antisymmetry_worst <= slack && grad_fd_rel_error <= fd_tol;
}

RegularizerPropertyReport check_regularizer_properties(const Regularizer& reg, int dimension,
                                                       int n_quadruples, double box,
                                                       CounterRng rng) {
  if (dimension <= 0) throw std::invalid_argument("check_regularizer_properties: bad dimension");
  RegularizerPropertyReport rep;
  rep.nonneg_min = std::numeric_limits<double>::infinity();
  rep.offdiag_phi_min = std::numeric_limits<double>::infinity();
  rep.strong_convexity_worst = std::numeric_limits<double>::infinity();
  rep.lipschitz_excess_worst = -std::numeric_limits<double>::infinity();

  const double lip = reg.lip_L();
  const double fd = 1e-5;
  for (int i = 0; i < n_quadruples; ++i) {
    Vector z = rng.uniform_vector(dimension, -box, box);
    Vector x = rng.uniform_vector(dimension, -box, box);
    Vector z2 = rng.uniform_vector(dimension, -box, box);
    Vector x2 = rng.uniform_vector(dimension, -box, box);

    const double phi_zx = reg.phi(z, x);
    const double phi_z2x2 = reg.phi(z2, x2);
    rep.nonneg_min = std::min({rep.nonneg_min, phi_zx, phi_z2x2});
    rep.diagonal_phi_max = std::max(rep.diagonal_phi_max, std::abs(reg.phi(x, x)));
    if ((z - x).norm() > 1e-8) rep.offdiag_phi_min = std::min(rep.offdiag_phi_min, phi_zx);

    Vector gz = reg.grad_z(z, x);
    Vector gx = reg.grad_x(z, x);
    rep.antisymmetry_worst = std::max(rep.antisymmetry_worst, (gz + gx).norm());

    const Vector diff = (z2 - z) - (x2 - x);
    const double residual = phi_z2x2 - phi_zx - gz.dot(z2 - z) - gx.dot(x2 - x) -
                            reg.beta() * diff.squaredNorm();
    rep.strong_convexity_worst = std::min(rep.strong_convexity_worst, residual);

    Vector dg(2 * dimension);
    dg.head(dimension) = reg.grad_z(z2, x2) - gz;
    dg.tail(dimension) = reg.grad_x(z2, x2) - gx;
    rep.lipschitz_excess_worst =
        std::max(rep.lipschitz_excess_worst, dg.norm() - lip * diff.norm());

    // central differences of phi against both analytic partials
    if (i < 100) {
      const double grad_scale = std::max({1.0, gz.lpNorm<Eigen::Infinity>(),
                                          gx.lpNorm<Eigen::Infinity>()});
      for (int c = 0; c < dimension; ++c) {
        Vector zp = z, zm = z;
        zp[c] += fd;
        zm[c] -= fd;
        const double fd_z = (reg.phi(zp, x) - reg.phi(zm, x)) / (2.0 * fd);
        Vector xp = x, xm = x;
        xp[c] += fd;
        xm[c] -= fd;
        const double fd_x = (reg.phi(z, xp) - reg.phi(z, xm)) / (2.0 * fd);
        rep.grad_fd_rel_error = std::max(rep.grad_fd_rel_error,
                                         std::abs(fd_z - gz[c]) / grad_scale);
        rep.grad_fd_rel_error = std::max(rep.grad_fd_rel_error,
                                         std::abs(fd_x - gx[c]) / grad_scale);
      }
    }
  }
  return rep;
}

Lemma2GridReport lemma2_grid(const BenchmarkProblem& problem, const Regularizer& reg,
                             const std::vector<double>& epsilons, int n_points, double box,
                             CounterRng rng, const BundleOptions& options) {
  Lemma2GridReport grid;
  grid.worst_point_margin = -std::numeric_limits<double>::infinity();
  grid.worst_grad_margin = -std::numeric_limits<double>::infinity();
  const int n = problem.oracle.dimension;
  for (double eps : epsilons) {
    const double exact_tol = std::min(eps * 1e-4, 1e-10);
    for (int i = 0; i < n_points; ++i) {
      Vector x = rng.uniform_vector(n, -box, box);
      ProxCertificate cert =
          inexact_prox(problem, reg, x, eps, ProxBackendChoice::bundle, options);
      EnvelopeValue exact = exact_envelope(problem, reg, x, exact_tol);
      Lemma2Report rep = verify_lemma2(problem, reg, x, eps, exact, cert, exact_tol);
      ++grid.checks;
      if (!rep.all_ok()) ++grid.violations;
      grid.worst_value_low_slack = std::max(grid.worst_value_low_slack, rep.value_low_slack);
      grid.worst_value_high_slack = std::max(grid.worst_value_high_slack, rep.value_high_slack);
      grid.worst_point_margin =
          std::max(grid.worst_point_margin, rep.point_dist - rep.point_bound);
      grid.worst_grad_margin = std::max(grid.worst_grad_margin, rep.grad_dist - rep.grad_bound);
    }
  }
  return grid;
}

double bd_regularity_probe(const BenchmarkProblem& problem, const Regularizer& reg,
                           const Vector& x_ref, int n_samples, double radius, CounterRng rng) {
  if (n_samples < 1) throw std::invalid_argument("bd_regularity_probe: n_samples must be >= 1");
  if (radius < 0.0) throw std::invalid_argument("bd_regularity_probe: radius must be >= 0");
  const int n = problem.oracle.dimension;
  const double fd_step = 1e-5;
  const double eps_inner = fd_step * fd_step * 1e-2;

  double min_curvature = std::numeric_limits<double>::infinity();
  for (int s = 0; s < n_samples; ++s) {
    Vector point = x_ref;
    if (radius > 0.0) point += radius * rng.uniform() * rng.unit_vector(n);
    CurvatureEstimate est = estimate_curvature(problem, reg, point, eps_inner, fd_step);
    for (int d = 0; d < 32; ++d) {
      Vector dir = rng.unit_vector(n);
      min_curvature = std::min(min_curvature, dir.dot(est.V * dir));
    }
  }
  return min_curvature;
}

} // namespace phireg
