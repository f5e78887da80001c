#pragma once

#include <optional>
#include <string>
#include <vector>

#include "phireg/linesearch.hpp"
#include "phireg/newton.hpp"
#include "phireg/prox.hpp"
#include "phireg/types.hpp"

namespace phireg {

enum class EpsMode { halving, superlinear };
enum class RateCondition { eps_vs_current_grad, eps_vs_previous_grad };
enum class CurvatureMode { fd_jacobian, none };  // none forces V = 0 (gradient steps)

struct SolverConfig {
  GAConfig ga;
  DampingSchedule damping;
  double eps0 = 1e-2;
  EpsMode eps_mode = EpsMode::halving;
  double eps_superlinear_eta = 1.0;  // eps_{k+1} = min(eps_k/2, eta*||g_a||^3)
  RateCondition rate_condition = RateCondition::eps_vs_current_grad;
  double grad_tol = 1e-8;
  double eps_tol = 1e-12;
  int max_iters = 200;
  ProxBackendChoice prox_backend = ProxBackendChoice::automatic;
  BundleOptions bundle;
  CurvatureMode curvature = CurvatureMode::fd_jacobian;
};

void validate(const SolverConfig& cfg);

/// One row of the iteration trace. Step fields are absent on the final record
/// (no step was taken from it).
struct IterateRecord {
  int k = 0;
  Vector x;
  double eps = 0.0;       // eps_k
  double f_phi_a = 0.0;   // merit at (x^k, eps_k)
  double g_a_norm = 0.0;
  int m = 0;              // window length m(k)
  std::optional<double> gamma_sup;        // -g_a'd/||d||
  std::optional<double> gamma_k;          // accepted slope coefficient
  std::optional<double> tau;              // rho^h * a
  std::optional<int> h;                   // backtrack count
  std::optional<double> alpha;
  std::optional<double> direction_norm;
  std::optional<double> dist_to_ref;      // ||x^k - x_ref|| when a reference minimizer exists
};

enum class SolveStatus { converged, max_iters, prox_failure, linesearch_failure };

std::string to_string(SolveStatus status);

struct SolveResult {
  std::vector<IterateRecord> trace;
  SolveStatus status = SolveStatus::max_iters;
  Vector x_final;
  std::string failure_message;  // empty unless a failure status
};

/// Outer loop: certified prox at (x^k, eps_k), damped-Newton direction from a
/// sampled curvature estimate, nonmonotone backtracking with eps_k slack, and
/// the eps_{k+1} schedule. Stops at ||g_a|| <= grad_tol with eps_k <= eps_tol
/// (or at an exactly zero g_a). Prox/line-search failures return a partial
/// trace with the corresponding status.
SolveResult solve(const BenchmarkProblem& problem, const Regularizer& reg, const Vector& x0,
                  const SolverConfig& cfg);

/// Post-hoc audit of every accepted step: recomputes the accepted point's
/// envelope value at high accuracy and rechecks the acceptance inequality with
/// a prox-noise allowance of 2*eps_{k+1} + 2*eps_k.
struct StepCheck {
  int k = 0;
  double lhs = 0.0;     // tight envelope value at x^{k+1}
  double rhs = 0.0;     // window max + gamma_k tau g_a'd + eps_k
  double excess = 0.0;  // lhs - rhs - allowance
  bool violated = false;
};

struct AcceptanceCheckReport {
  std::vector<StepCheck> steps;
  int violations = 0;
};

AcceptanceCheckReport check_acceptance_posthoc(const std::vector<IterateRecord>& trace,
                                               const BenchmarkProblem& problem,
                                               const Regularizer& reg, const SolverConfig& cfg);

} // namespace phireg
