#include "phireg/config_io.hpp"

#include <cmath>

#include "phireg/errors.hpp"

namespace phireg {

namespace {

double require_number(const nlohmann::json& doc, const std::string& key, const std::string& where) {
  if (!doc.contains(key)) throw ConfigError(where + ": missing required key '" + key + "'");
  if (!doc.at(key).is_number()) throw ConfigError(where + ": key '" + key + "' must be a number");
  return doc.at(key).get<double>();
}

double number_or(const nlohmann::json& doc, const std::string& key, double fallback,
                 const std::string& where) {
  if (!doc.contains(key)) return fallback;
  if (!doc.at(key).is_number()) throw ConfigError(where + ": key '" + key + "' must be a number");
  return doc.at(key).get<double>();
}

int int_or(const nlohmann::json& doc, const std::string& key, int fallback,
           const std::string& where) {
  if (!doc.contains(key)) return fallback;
  if (!doc.at(key).is_number_integer()) throw ConfigError(where + ": key '" + key + "' must be an integer");
  return doc.at(key).get<int>();
}

std::string string_or(const nlohmann::json& doc, const std::string& key,
                      const std::string& fallback, const std::string& where) {
  if (!doc.contains(key)) return fallback;
  if (!doc.at(key).is_string()) throw ConfigError(where + ": key '" + key + "' must be a string");
  return doc.at(key).get<std::string>();
}

nlohmann::json optional_to_json(const std::optional<double>& v) {
  if (v) return *v;
  return nullptr;
}

} // namespace

nlohmann::json vector_to_json_array(const Vector& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vector vector_from_json_array(const nlohmann::json& arr) {
  if (!arr.is_array()) throw ConfigError("expected a numeric array");
  Vector v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) throw ConfigError("expected a numeric array");
    v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  }
  return v;
}

Regularizer regularizer_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("regularizer: expected an object");
  const std::string type = string_or(doc, "type", "quadratic", "regularizer");
  const double lambda = require_number(doc, "lambda", "regularizer");
  if (type == "quadratic") {
    try {
      return Regularizer::quadratic(lambda);
    } catch (const std::invalid_argument& err) {
      throw ConfigError(std::string("regularizer: ") + err.what());
    }
  }
  if (type == "metric") {
    if (!doc.contains("M")) throw ConfigError("regularizer: metric type requires key 'M'");
    const auto& rows = doc.at("M");
    if (!rows.is_array() || rows.empty()) throw ConfigError("regularizer: 'M' must be a matrix");
    const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
    Matrix M(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!rows[i].is_array() || static_cast<Eigen::Index>(rows[i].size()) != n)
        throw ConfigError("regularizer: 'M' must be square");
      for (Eigen::Index j = 0; j < n; ++j) M(i, j) = rows[i][j].get<double>();
    }
    try {
      return Regularizer::metric(M, lambda);
    } catch (const std::invalid_argument& err) {
      throw ConfigError(std::string("regularizer: ") + err.what());
    }
  }
  throw ConfigError("regularizer: unknown type '" + type + "'");
}

nlohmann::json regularizer_to_json(const Regularizer& reg) {
  nlohmann::json doc{{"lambda", reg.lambda()}};
  if (reg.kind() == Regularizer::Kind::quadratic) {
    doc["type"] = "quadratic";
  } else {
    doc["type"] = "metric";
    const Matrix& M = reg.metric_matrix();
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
      rows.push_back(std::move(row));
    }
    doc["M"] = std::move(rows);
  }
  return doc;
}

SolverConfig solver_config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("solver: expected an object");
  SolverConfig cfg;

  if (doc.contains("ga")) {
    const auto& ga = doc.at("ga");
    cfg.ga.initial_step = number_or(ga, "a", cfg.ga.initial_step, "solver.ga");
    cfg.ga.delta = number_or(ga, "delta", cfg.ga.delta, "solver.ga");
    cfg.ga.rho = number_or(ga, "rho", cfg.ga.rho, "solver.ga");
    cfg.ga.c1 = number_or(ga, "c1", cfg.ga.c1, "solver.ga");
    cfg.ga.window_cap = int_or(ga, "M", cfg.ga.window_cap, "solver.ga");
    cfg.ga.max_backtracks = int_or(ga, "max_backtracks", cfg.ga.max_backtracks, "solver.ga");
    try {
      if (ga.contains("forcing"))
        cfg.ga.forcing = Forcing::from_name(
            string_or(ga.at("forcing"), "name", "identity", "solver.ga.forcing"));
      if (ga.contains("damping")) {
        const auto& damping = ga.at("damping");
        cfg.ga.damping = Damping::from_name(string_or(damping, "name", "inverse", "solver.ga.damping"),
                                            number_or(damping, "c", 0.4, "solver.ga.damping"));
      }
    } catch (const std::invalid_argument& err) {
      throw ConfigError(std::string("solver.ga: ") + err.what());
    }
  }

  if (doc.contains("damping_schedule")) {
    const auto& ds = doc.at("damping_schedule");
    const std::string mode = string_or(ds, "mode", "gradient_proportional", "solver.damping_schedule");
    if (mode == "constant")
      cfg.damping.mode = DampingSchedule::Mode::constant;
    else if (mode == "gradient_proportional")
      cfg.damping.mode = DampingSchedule::Mode::gradient_proportional;
    else
      throw ConfigError("solver.damping_schedule: unknown mode '" + mode + "'");
    cfg.damping.alpha0 = number_or(ds, "alpha0", cfg.damping.alpha0, "solver.damping_schedule");
    cfg.damping.kappa = number_or(ds, "kappa", cfg.damping.kappa, "solver.damping_schedule");
    cfg.damping.alpha_min = number_or(ds, "alpha_min", cfg.damping.alpha_min, "solver.damping_schedule");
  }

  cfg.eps0 = number_or(doc, "eps0", cfg.eps0, "solver");
  const std::string eps_mode = string_or(doc, "eps_mode", "halving", "solver");
  if (eps_mode == "halving")
    cfg.eps_mode = EpsMode::halving;
  else if (eps_mode == "superlinear")
    cfg.eps_mode = EpsMode::superlinear;
  else
    throw ConfigError("solver: unknown eps_mode '" + eps_mode + "'");
  cfg.eps_superlinear_eta = number_or(doc, "eps_superlinear_eta", cfg.eps_superlinear_eta, "solver");

  const std::string rate = string_or(doc, "rate_condition", "current", "solver");
  if (rate == "current")
    cfg.rate_condition = RateCondition::eps_vs_current_grad;
  else if (rate == "previous")
    cfg.rate_condition = RateCondition::eps_vs_previous_grad;
  else
    throw ConfigError("solver: unknown rate_condition '" + rate + "'");

  cfg.grad_tol = number_or(doc, "grad_tol", cfg.grad_tol, "solver");
  cfg.eps_tol = number_or(doc, "eps_tol", cfg.eps_tol, "solver");
  cfg.max_iters = int_or(doc, "max_iters", cfg.max_iters, "solver");

  const std::string backend = string_or(doc, "prox_backend", "auto", "solver");
  if (backend == "auto")
    cfg.prox_backend = ProxBackendChoice::automatic;
  else if (backend == "closed_form")
    cfg.prox_backend = ProxBackendChoice::closed_form;
  else if (backend == "bundle")
    cfg.prox_backend = ProxBackendChoice::bundle;
  else
    throw ConfigError("solver: unknown prox_backend '" + backend + "'");
  cfg.bundle.max_cuts = int_or(doc, "max_cuts", cfg.bundle.max_cuts, "solver");

  const std::string curvature = string_or(doc, "curvature", "fd", "solver");
  if (curvature == "fd")
    cfg.curvature = CurvatureMode::fd_jacobian;
  else if (curvature == "none")
    cfg.curvature = CurvatureMode::none;
  else
    throw ConfigError("solver: unknown curvature mode '" + curvature + "'");

  try {
    validate(cfg);
  } catch (const std::invalid_argument& err) {
    throw ConfigError(err.what());
  }
  return cfg;
}

nlohmann::json solver_config_to_json(const SolverConfig& cfg) {
  return nlohmann::json{
      {"ga",
       {{"a", cfg.ga.initial_step},
        {"delta", cfg.ga.delta},
        {"rho", cfg.ga.rho},
        {"c1", cfg.ga.c1},
        {"M", cfg.ga.window_cap},
        {"forcing", {{"name", cfg.ga.forcing.name()}}},
        {"damping", {{"name", cfg.ga.damping.name()}, {"c", cfg.ga.damping.scale()}}},
        {"max_backtracks", cfg.ga.max_backtracks}}},
      {"damping_schedule",
       {{"mode", cfg.damping.mode == DampingSchedule::Mode::constant ? "constant"
                                                                     : "gradient_proportional"},
        {"alpha0", cfg.damping.alpha0},
        {"kappa", cfg.damping.kappa},
        {"alpha_min", cfg.damping.alpha_min}}},
      {"eps0", cfg.eps0},
      {"eps_mode", cfg.eps_mode == EpsMode::halving ? "halving" : "superlinear"},
      {"eps_superlinear_eta", cfg.eps_superlinear_eta},
      {"rate_condition",
       cfg.rate_condition == RateCondition::eps_vs_current_grad ? "current" : "previous"},
      {"grad_tol", cfg.grad_tol},
      {"eps_tol", cfg.eps_tol},
      {"max_iters", cfg.max_iters},
      {"prox_backend", cfg.prox_backend == ProxBackendChoice::automatic
                           ? "auto"
                           : (cfg.prox_backend == ProxBackendChoice::closed_form ? "closed_form"
                                                                                 : "bundle")},
      {"max_cuts", cfg.bundle.max_cuts},
      {"curvature", cfg.curvature == CurvatureMode::fd_jacobian ? "fd" : "none"}};
}

nlohmann::json record_to_json(const IterateRecord& rec) {
  nlohmann::json doc{{"k", rec.k},
                     {"x", vector_to_json_array(rec.x)},
                     {"eps", rec.eps},
                     {"f_phi_a", rec.f_phi_a},
                     {"g_a_norm", rec.g_a_norm},
                     {"m", rec.m},
                     {"gamma_sup", optional_to_json(rec.gamma_sup)},
                     {"gamma_k", optional_to_json(rec.gamma_k)},
                     {"tau", optional_to_json(rec.tau)},
                     {"alpha", optional_to_json(rec.alpha)},
                     {"direction_norm", optional_to_json(rec.direction_norm)},
                     {"dist_to_ref", optional_to_json(rec.dist_to_ref)}};
  if (rec.h)
    doc["h"] = *rec.h;
  else
    doc["h"] = nullptr;
  return doc;
}

nlohmann::json solve_summary_to_json(const SolveResult& result, const BenchmarkProblem& problem) {
  nlohmann::json doc{{"problem", problem.name},
                     {"status", to_string(result.status)},
                     {"iterations", result.trace.empty() ? 0 : result.trace.back().k},
                     {"x_final", vector_to_json_array(result.x_final)},
                     {"f_final", problem.oracle.value(result.x_final)}};
  if (!result.trace.empty()) {
    doc["g_a_norm_final"] = result.trace.back().g_a_norm;
    doc["eps_final"] = result.trace.back().eps;
  }
  if (problem.known_minimum) doc["f_gap"] = problem.oracle.value(result.x_final) - *problem.known_minimum;
  if (!result.failure_message.empty()) doc["failure_message"] = result.failure_message;
  return doc;
}

nlohmann::json lemma2_report_to_json(const Lemma2Report& rep) {
  return nlohmann::json{{"value_sandwich_ok", rep.value_sandwich_ok},
                        {"point_bound_ok", rep.point_bound_ok},
                        {"gradient_bound_ok", rep.gradient_bound_ok},
                        {"value_low_slack", rep.value_low_slack},
                        {"value_high_slack", rep.value_high_slack},
                        {"point_dist", rep.point_dist},
                        {"point_bound", rep.point_bound},
                        {"grad_dist", rep.grad_dist},
                        {"grad_bound", rep.grad_bound}};
}

nlohmann::json lemma2_grid_to_json(const Lemma2GridReport& rep) {
  return nlohmann::json{{"checks", rep.checks},
                        {"violations", rep.violations},
                        {"worst_value_low_slack", rep.worst_value_low_slack},
                        {"worst_value_high_slack", rep.worst_value_high_slack},
                        {"worst_point_margin", rep.worst_point_margin},
                        {"worst_grad_margin", rep.worst_grad_margin}};
}

nlohmann::json optimality_report_to_json(const OptimalityReport& rep) {
  return nlohmann::json{{"x", vector_to_json_array(rep.x)},
                        {"a2_prox_residual", rep.prox_residual},
                        {"a3_gradient_norm", rep.gradient_norm},
                        {"a5_prox_value_gap", rep.prox_value_gap},
                        {"a6_envelope_value_gap", rep.envelope_value_gap}};
}

nlohmann::json lipschitz_result_to_json(const LipschitzProbeResult& rep) {
  return nlohmann::json{{"max_ratio", rep.max_ratio},
                        {"bound", rep.bound},
                        {"pairs_used", rep.pairs_used},
                        {"pass", rep.pass}};
}

nlohmann::json rate_report_to_json(const RateReport& rep) {
  nlohmann::json doc{{"ratios_1step", rep.ratios_1step},
                     {"ratios_2step", rep.ratios_2step},
                     {"tail_max_2step", rep.tail_max_2step}};
  if (std::isnan(rep.quadratic_constant_estimate))
    doc["quadratic_constant_estimate"] = nullptr;
  else
    doc["quadratic_constant_estimate"] = rep.quadratic_constant_estimate;
  return doc;
}

nlohmann::json regularizer_properties_to_json(const RegularizerPropertyReport& rep) {
  return nlohmann::json{{"nonneg_min", rep.nonneg_min},
                        {"offdiag_phi_min", rep.offdiag_phi_min},
                        {"diagonal_phi_max", rep.diagonal_phi_max},
                        {"strong_convexity_worst", rep.strong_convexity_worst},
                        {"lipschitz_excess_worst", rep.lipschitz_excess_worst},
                        {"antisymmetry_worst", rep.antisymmetry_worst},
                        {"grad_fd_rel_error", rep.grad_fd_rel_error}};
}

nlohmann::json acceptance_check_to_json(const AcceptanceCheckReport& rep) {
  nlohmann::json steps = nlohmann::json::array();
  for (const StepCheck& s : rep.steps)
    steps.push_back({{"k", s.k}, {"lhs", s.lhs}, {"rhs", s.rhs}, {"excess", s.excess},
                     {"violated", s.violated}});
  return nlohmann::json{{"violations", rep.violations}, {"steps", std::move(steps)}};
}

} // namespace phireg
