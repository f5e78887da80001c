#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "phireg/regularizer.hpp"
#include "phireg/types.hpp"

namespace phireg {

enum class ProxBackend { closed_form, bundle };

/// Certified inexact prox evaluation at accuracy epsilon:
///   f_phi_a = f(p_a) + phi(p_a, x)/lambda        (exact by construction)
///   g_a     = grad_x phi(p_a, x)/lambda          (exact by construction)
///   f_phi_a - lower_bound <= epsilon, with lower_bound <= f_phi(x),
/// so f_phi_a <= f_phi(x) + epsilon.
struct ProxCertificate {
  Vector p_a;
  double f_phi_a = 0.0;
  Vector g_a;
  double epsilon = 0.0;
  double lower_bound = 0.0;
  ProxBackend backend = ProxBackend::bundle;
  int cuts_used = 0;
};

struct ProxFailureError : std::runtime_error {
  ProxFailureError(const std::string& msg, ProxCertificate best, double gap)
      : std::runtime_error(msg), best_certificate(std::move(best)), achieved_gap(gap) {}
  ProxCertificate best_certificate;
  double achieved_gap;
};

struct Cut {
  Vector z;
  double value;      // f(z)
  Vector subgrad;    // element of the subdifferential at z
  double offset;     // f(z) - subgrad'z, the cut's constant term
  Vector metric_inv_subgrad;  // M^{-1} subgrad, cached for the dual Gram
};

struct BundleState {
  std::vector<Cut> cuts;
  std::vector<double> weights;  // dual simplex weights, aligned with cuts
  Vector incumbent;
  double incumbent_value = 0.0;
  double best_lower = 0.0;
  int iterations = 0;
};

struct BundleOptions {
  int max_cuts = 10000;      // oracle-call cap before declaring prox failure
  int max_kept_cuts = 200;   // inactive cuts beyond this are dropped
  double qp_tol = 1e-12;     // dual model-subproblem tolerance
};

struct BundleResult {
  Vector z_best;
  double lower_bound = 0.0;
  int cuts_used = 0;
};

/// Cutting-plane minimization of theta(z) = f(z) + phi(z,x)/lambda down to a
/// certified gap epsilon: theta(z_best) - lower_bound <= epsilon. The lower
/// bound is the dual value of the polyhedral-model subproblem and is valid for
/// any feasible dual point, so certificates are sound even with an inexactly
/// solved model. Throws ProxFailureError when the cut cap is exhausted.
BundleResult bundle_minimize(const BenchmarkProblem& problem, const Regularizer& reg,
                             const Vector& x, double epsilon,
                             const BundleOptions& options = {});

enum class ProxBackendChoice { automatic, closed_form, bundle };

/// Certified inexact prox. automatic prefers the problem's exact prox (gap 0)
/// and falls back to the bundle backend. closed_form throws
/// std::invalid_argument when the problem has no exact prox for this
/// regularizer.
ProxCertificate inexact_prox(const BenchmarkProblem& problem, const Regularizer& reg,
                             const Vector& x, double epsilon,
                             ProxBackendChoice choice = ProxBackendChoice::automatic,
                             const BundleOptions& options = {});

/// Checks the three approximation bounds of an inexact prox certificate
/// against an exact envelope evaluation:
///   value sandwich   f_phi(x) <= f_phi_a <= f_phi(x) + epsilon,
///   point bound      ||p_a - p|| <= sqrt(lambda eps / beta),
///   gradient bound   ||g_a - g|| <= sqrt(L^2 eps / (beta lambda)).
/// exact_tol is the accuracy the exact envelope was computed at and sets the
/// numerical slack the checks allow.
struct Lemma2Report {
  bool value_sandwich_ok = false;
  bool point_bound_ok = false;
  bool gradient_bound_ok = false;
  double value_low_slack = 0.0;   // max(0, f_phi - f_phi_a)
  double value_high_slack = 0.0;  // max(0, f_phi_a - f_phi - eps)
  double point_dist = 0.0;
  double point_bound = 0.0;
  double grad_dist = 0.0;
  double grad_bound = 0.0;
  bool all_ok() const { return value_sandwich_ok && point_bound_ok && gradient_bound_ok; }
};

Lemma2Report verify_lemma2(const BenchmarkProblem& problem, const Regularizer& reg,
                           const Vector& x, double epsilon, const EnvelopeValue& exact,
                           const ProxCertificate& cert, double exact_tol = 1e-10);

} // namespace phireg
