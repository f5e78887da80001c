#include "phireg/linesearch.hpp"

#include <cmath>
#include <limits>

namespace phireg {

Forcing Forcing::from_name(const std::string& name) {
  if (name == "identity") return Forcing(Kind::identity);
  if (name == "min_t_t2") return Forcing(Kind::min_t_t2);
  if (name == "square") return Forcing(Kind::square);
  throw std::invalid_argument("unknown forcing function '" + name + "'");
}

std::string Forcing::name() const {
  switch (kind_) {
    case Kind::identity: return "identity";
    case Kind::min_t_t2: return "min_t_t2";
    case Kind::square: return "square";
  }
  return "identity";
}

Damping::Damping(Kind kind, double scale) : kind_(kind), scale_(scale) {
  if (!(scale > 0.0) || scale >= 1.0)
    throw std::invalid_argument("damping scale must lie in (0, 1)");
}

Damping Damping::from_name(const std::string& name, double scale) {
  if (name == "inverse") return Damping(Kind::inverse, scale);
  if (name == "exponential") return Damping(Kind::exponential, scale);
  throw std::invalid_argument("unknown damping function '" + name + "'");
}

std::string Damping::name() const {
  return kind_ == Kind::inverse ? "inverse" : "exponential";
}

void validate(const GAConfig& cfg) {
  if (!(cfg.initial_step > 0.0)) throw std::invalid_argument("line search: a must be > 0");
  if (!(cfg.delta > 0.0) || cfg.delta >= 1.0)
    throw std::invalid_argument("line search: delta must lie in (0, 1)");
  if (!(cfg.rho > 0.0) || cfg.rho >= 1.0)
    throw std::invalid_argument("line search: rho must lie in (0, 1)");
  if (!(cfg.c1 > 0.0)) throw std::invalid_argument("line search: c1 must be > 0");
  if (cfg.window_cap < 0) throw std::invalid_argument("line search: M must be >= 0");
  if (cfg.max_backtracks <= 0)
    throw std::invalid_argument("line search: max_backtracks must be positive");
}

double WindowState::max_value() const {
  double m = values_.front();
  for (double v : values_) m = std::max(m, v);
  return m;
}

void update_window(WindowState& window, double accepted_value, const GAConfig& cfg) {
  window.m_ = std::min(window.m_ + 1, cfg.window_cap);
  window.values_.push_back(accepted_value);
  while (static_cast<int>(window.values_.size()) > cfg.window_cap + 1)
    window.values_.pop_front();
}

SlopeTerms slope_terms(const Vector& g_a, const Vector& d, const GAConfig& cfg) {
  const double d_norm = d.norm();
  if (!(d_norm > 0.0)) throw InvalidDirectionError("slope_terms: zero direction");
  const double gd = g_a.dot(d);
  if (!(gd < 0.0)) throw InvalidDirectionError("slope_terms: not a descent direction");
  SlopeTerms terms;
  terms.descent_rate = -gd / d_norm;
  terms.slope_coeff =
      std::min(cfg.delta, cfg.c1 * cfg.forcing(terms.descent_rate) + cfg.damping(g_a.norm()));
  return terms;
}

StepResult ga_search(const std::function<double(double)>& merit, const Vector& g_a,
                     const Vector& d, const WindowState& window, double slope_coeff,
                     double eps_slack, const GAConfig& cfg) {
  const double gd = g_a.dot(d);
  if (!(gd < 0.0)) throw InvalidDirectionError("ga_search: g_a'd must be negative");
  const double window_max = window.max_value();

  double best_tau = 0.0;
  double best_value = std::numeric_limits<double>::infinity();
  for (int h = 0; h <= cfg.max_backtracks; ++h) {
    const double tau = std::pow(cfg.rho, h) * cfg.initial_step;
    const double value = merit(tau);
    if (value < best_value) {
      best_value = value;
      best_tau = tau;
    }
    if (value <= window_max + slope_coeff * tau * gd + eps_slack) return {tau, h, value};
  }
  throw LinesearchFailureError("ga_search: no acceptable step within the backtrack budget",
                               best_tau, best_value, cfg.max_backtracks + 1);
}

} // namespace phireg
