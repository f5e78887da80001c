#include "phireg/driver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace phireg {

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iters: return "max_iters";
    case SolveStatus::prox_failure: return "prox_failure";
    case SolveStatus::linesearch_failure: return "linesearch_failure";
  }
  return "unknown";
}

void validate(const SolverConfig& cfg) {
  validate(cfg.ga);
  if (!(cfg.eps0 > 0.0)) throw std::invalid_argument("solver: eps0 must be > 0");
  if (!(cfg.grad_tol > 0.0)) throw std::invalid_argument("solver: grad_tol must be > 0");
  if (!(cfg.eps_tol > 0.0)) throw std::invalid_argument("solver: eps_tol must be > 0");
  if (cfg.max_iters < 0) throw std::invalid_argument("solver: max_iters must be >= 0");
  if (cfg.eps_mode == EpsMode::superlinear && !(cfg.eps_superlinear_eta > 0.0))
    throw std::invalid_argument("solver: eps_superlinear_eta must be > 0");
}

SolveResult solve(const BenchmarkProblem& problem, const Regularizer& reg, const Vector& x0,
                  const SolverConfig& cfg) {
  validate(cfg);
  if (x0.size() != problem.oracle.dimension)
    throw std::invalid_argument("solve: x0 dimension mismatch");
  if (!x0.allFinite()) throw std::invalid_argument("solve: x0 must be finite");

  SolveResult out;
  Vector x = x0;
  double eps = cfg.eps0;
  ProxCertificate cert;
  try {
    cert = inexact_prox(problem, reg, x, eps, cfg.prox_backend, cfg.bundle);
  } catch (const ProxFailureError& err) {
    out.status = SolveStatus::prox_failure;
    out.failure_message = err.what();
    out.x_final = x;
    return out;
  }

  WindowState window(cert.f_phi_a);
  std::optional<double> prev_g_norm;
  int k = 0;
  while (true) {
    IterateRecord rec;
    rec.k = k;
    rec.x = x;
    rec.eps = eps;
    rec.f_phi_a = cert.f_phi_a;
    rec.g_a_norm = cert.g_a.norm();
    rec.m = window.length();
    if (problem.known_minimizer) rec.dist_to_ref = (x - *problem.known_minimizer).norm();

    if (rec.g_a_norm == 0.0 || (rec.g_a_norm <= cfg.grad_tol && eps <= cfg.eps_tol)) {
      out.trace.push_back(std::move(rec));
      out.status = SolveStatus::converged;
      break;
    }
    if (k >= cfg.max_iters) {
      out.trace.push_back(std::move(rec));
      out.status = SolveStatus::max_iters;
      break;
    }

    try {
      const double fd_step = std::max(1e-5, 10.0 * std::sqrt(eps));
      const double eps_inner = std::min(eps, fd_step * fd_step * 1e-2);
      CurvatureEstimate curvature;
      if (cfg.curvature == CurvatureMode::fd_jacobian) {
        curvature = estimate_curvature(problem, reg, x, eps_inner, fd_step, cfg.prox_backend,
                                       cfg.bundle);
      } else {
        curvature.V = Matrix::Zero(x.size(), x.size());
        curvature.probe_point = x;
        curvature.fd_step = fd_step;
      }
      const double alpha = next_alpha(cfg.damping, rec.g_a_norm);
      Vector d = newton_direction(curvature, alpha, cert.g_a);
      if (!(cert.g_a.dot(d) < 0.0))
        throw std::runtime_error("solve: damped Newton direction failed the descent guarantee");
      SlopeTerms slope = slope_terms(cert.g_a, d, cfg.ga);

      double eps_next = 0.5 * eps;
      if (cfg.eps_mode == EpsMode::superlinear) {
        // cube of the gradient norm strictly dominates the required square;
        // falls back to the current iterate's norm at k = 0
        const double g_for_rate =
            (cfg.rate_condition == RateCondition::eps_vs_previous_grad && prev_g_norm)
                ? *prev_g_norm
                : rec.g_a_norm;
        eps_next = std::min(eps_next, cfg.eps_superlinear_eta * g_for_rate * g_for_rate * g_for_rate);
        eps_next = std::max(eps_next, std::numeric_limits<double>::denorm_min());
      }

      std::vector<std::pair<double, ProxCertificate>> trials;
      auto merit = [&](double tau) {
        ProxCertificate trial =
            inexact_prox(problem, reg, x + tau * d, eps_next, cfg.prox_backend, cfg.bundle);
        const double value = trial.f_phi_a;
        trials.emplace_back(tau, std::move(trial));
        return value;
      };
      StepResult step = ga_search(merit, cert.g_a, d, window, slope.slope_coeff, eps, cfg.ga);

      rec.gamma_sup = slope.descent_rate;
      rec.gamma_k = slope.slope_coeff;
      rec.tau = step.tau;
      rec.h = step.backtracks;
      rec.alpha = alpha;
      rec.direction_norm = d.norm();
      out.trace.push_back(std::move(rec));

      x = x + step.tau * d;
      for (auto& trial : trials) {
        if (trial.first == step.tau) {
          cert = std::move(trial.second);  // the accepted trial doubles as the next certificate
          break;
        }
      }
      update_window(window, step.accepted_value, cfg.ga);
      prev_g_norm = out.trace.back().g_a_norm;
      eps = eps_next;
      ++k;
    } catch (const ProxFailureError& err) {
      out.trace.push_back(std::move(rec));
      out.status = SolveStatus::prox_failure;
      out.failure_message = err.what();
      break;
    } catch (const LinesearchFailureError& err) {
      out.trace.push_back(std::move(rec));
      out.status = SolveStatus::linesearch_failure;
      out.failure_message = err.what();
      break;
    }
  }
  out.x_final = x;
  return out;
}

AcceptanceCheckReport check_acceptance_posthoc(const std::vector<IterateRecord>& trace,
                                               const BenchmarkProblem& problem,
                                               const Regularizer& reg, const SolverConfig& cfg) {
  (void)cfg;
  AcceptanceCheckReport report;
  for (std::size_t k = 0; k + 1 < trace.size(); ++k) {
    const IterateRecord& rec = trace[k];
    const IterateRecord& next = trace[k + 1];
    if (!rec.tau) continue;

    double window_max = -std::numeric_limits<double>::infinity();
    for (int j = 0; j <= rec.m && j <= static_cast<int>(k); ++j)
      window_max = std::max(window_max, trace[k - static_cast<std::size_t>(j)].f_phi_a);

    const double gd = -(*rec.gamma_sup) * (*rec.direction_norm);
    const double rhs = window_max + (*rec.gamma_k) * (*rec.tau) * gd + rec.eps;
    const double tol = std::clamp(next.eps, 1e-12, 1e-10);
    const double lhs = exact_envelope(problem, reg, next.x, tol).f_phi;
    const double allowance = 2.0 * next.eps + 2.0 * rec.eps + 1e-12 * std::max(1.0, std::abs(rhs));

    StepCheck check;
    check.k = rec.k;
    check.lhs = lhs;
    check.rhs = rhs;
    check.excess = lhs - rhs - allowance;
    check.violated = check.excess > 0.0;
    if (check.violated) ++report.violations;
    report.steps.push_back(check);
  }
  return report;
}

} // namespace phireg
