#pragma once

#include <deque>
#include <functional>
#include <stdexcept>
#include <string>

#include "phireg/errors.hpp"
#include "phireg/types.hpp"

namespace phireg {

/// Forcing map: phi(t_i) -> 0 implies t_i -> 0. Restricted to a registered
/// family, each member analytically forcing.
class Forcing {
public:
  enum class Kind { identity, min_t_t2, square };

  Forcing() = default;
  explicit Forcing(Kind kind) : kind_(kind) {}
  static Forcing from_name(const std::string& name);
  std::string name() const;

  double operator()(double t) const {
    switch (kind_) {
      case Kind::identity: return t;
      case Kind::min_t_t2: return t < 1.0 ? t * t : t;
      case Kind::square: return t * t;
    }
    return t;
  }

private:
  Kind kind_ = Kind::identity;
};

/// Damping map psi: [0,inf) -> [0,1), nonincreasing, psi(t) > 0 for t > 0.
class Damping {
public:
  enum class Kind { inverse, exponential };

  Damping() = default;
  Damping(Kind kind, double scale);
  static Damping from_name(const std::string& name, double scale);
  std::string name() const;
  double scale() const { return scale_; }

  double operator()(double t) const {
    switch (kind_) {
      case Kind::inverse: return scale_ / (1.0 + t);
      case Kind::exponential: return scale_ * std::exp(-t);
    }
    return scale_;
  }

private:
  Kind kind_ = Kind::inverse;
  double scale_ = 0.4;
};

struct GAConfig {
  double initial_step = 1.0;  // a
  double delta = 0.45;        // slope cap, in (0,1); < 1/2 enables unit steps
  double rho = 0.5;           // backtracking factor, in (0,1)
  double c1 = 0.1;
  int window_cap = 5;         // M; 0 degenerates to the monotone rule
  Forcing forcing;
  Damping damping;
  int max_backtracks = 60;
};

/// Throws std::invalid_argument when a GAConfig field is out of range.
void validate(const GAConfig& cfg);

/// Sliding window of accepted merit values. Holds the last m+1 values with
/// m(0) = 0 and m(k) = min(m(k-1)+1, M).
class WindowState {
public:
  explicit WindowState(double initial_value) : values_{initial_value} {}

  double max_value() const;
  int length() const { return m_; }  // m(k)
  const std::deque<double>& values() const { return values_; }

  friend void update_window(WindowState& window, double accepted_value, const GAConfig& cfg);

private:
  std::deque<double> values_;
  int m_ = 0;
};

/// Pushes an accepted merit value: m <- min(m+1, M), oldest entries evicted
/// beyond M+1.
void update_window(WindowState& window, double accepted_value, const GAConfig& cfg);

/// descent_rate is the per-unit-step decrease -g_a'd/||d||; slope_coeff the
/// Armijo coefficient min(delta, c1*forcing(descent_rate) + damping(||g_a||)).
/// Throws InvalidDirectionError on d = 0 or a non-descent direction.
struct SlopeTerms {
  double descent_rate = 0.0;  // gamma^k
  double slope_coeff = 0.0;   // gamma_k
};
SlopeTerms slope_terms(const Vector& g_a, const Vector& d, const GAConfig& cfg);

struct LinesearchFailureError : std::runtime_error {
  LinesearchFailureError(const std::string& msg, double tau, double value, int tried)
      : std::runtime_error(msg), best_tau(tau), best_value(value), backtracks_tried(tried) {}
  double best_tau;
  double best_value;
  int backtracks_tried;
};

struct StepResult {
  double tau = 0.0;
  int backtracks = 0;  // h, with tau = rho^h * a
  double accepted_value = 0.0;
};

/// Backtracking search: smallest h >= 0 with
///   merit(rho^h a) <= max(window) + slope_coeff * rho^h a * (g_a'd) + eps_slack.
/// eps_slack = 0 recovers the plain nonmonotone rule for exact merits.
/// Throws LinesearchFailureError (carrying the best trial) past max_backtracks
/// and InvalidDirectionError when g_a'd >= 0.
StepResult ga_search(const std::function<double(double)>& merit, const Vector& g_a,
                     const Vector& d, const WindowState& window, double slope_coeff,
                     double eps_slack, const GAConfig& cfg);

} // namespace phireg
