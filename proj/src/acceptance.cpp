#include "phireg/acceptance.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "phireg/config_io.hpp"
#include "phireg/diagnostics.hpp"
#include "phireg/driver.hpp"
#include "phireg/errors.hpp"
#include "phireg/oracle.hpp"
#include "phireg/prox.hpp"
#include "phireg/regularizer.hpp"
#include "phireg/rng.hpp"

namespace phireg::acceptance {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

double tail_max(const std::vector<double>& values, std::size_t count) {
  double m = 0.0;
  const std::size_t take = std::min(count, values.size());
  for (std::size_t i = values.size() - take; i < values.size(); ++i)
    m = std::max(m, values[i]);
  return m;
}

// 1. Defining properties of both regularizer families on random quadruples.
CriterionResult regularizer_axioms(std::uint64_t seed) {
  CriterionResult res{1, "regularizer_axioms", false, "", {}};
  CounterRng rng(seed, 11);

  const Regularizer quad = Regularizer::quadratic(1.0);
  Matrix M = Matrix::Zero(2, 2);
  M(0, 0) = 3.0;
  M(1, 1) = 0.5;
  const Regularizer metric = Regularizer::metric(M, 1.0);

  const auto rep_q = check_regularizer_properties(quad, 3, 1000, 5.0, rng.stream(1));
  const auto rep_m = check_regularizer_properties(metric, 2, 1000, 5.0, rng.stream(2));
  res.pass = rep_q.pass(1e-9, 1e-6) && rep_m.pass(1e-9, 1e-6);
  const double worst = std::max(
      {-rep_q.strong_convexity_worst, rep_q.lipschitz_excess_worst, rep_q.antisymmetry_worst,
       -rep_m.strong_convexity_worst, rep_m.lipschitz_excess_worst, rep_m.antisymmetry_worst});
  res.statistic = "worst_slack=" + fmt(worst);
  res.report = {{"quadratic", regularizer_properties_to_json(rep_q)},
                {"metric_diag_3_0.5", regularizer_properties_to_json(rep_m)}};
  return res;
}

// 2. Envelope of |.| with quadratic coupling at lambda 1 equals the analytic
//    piecewise form on a 201-point grid.
CriterionResult moreau_consistency(std::uint64_t seed) {
  (void)seed;
  CriterionResult res{2, "moreau_consistency", false, "", {}};
  const BenchmarkProblem abs1 = make_abs_problem();
  const Regularizer reg = Regularizer::quadratic(1.0);

  double worst = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double x = -5.0 + 0.05 * i;
    Vector xv(1);
    xv[0] = x;
    const EnvelopeValue env = exact_envelope(abs1, reg, xv, 1e-12);
    double f_ref, p_ref, g_ref;
    if (std::abs(x) <= 1.0) {
      f_ref = 0.5 * x * x;
      p_ref = 0.0;
      g_ref = x;
    } else {
      f_ref = std::abs(x) - 0.5;
      p_ref = x - (x > 0 ? 1.0 : -1.0);
      g_ref = x > 0 ? 1.0 : -1.0;
    }
    worst = std::max({worst, std::abs(env.f_phi - f_ref), std::abs(env.p[0] - p_ref),
                      std::abs(env.grad[0] - g_ref)});
  }
  res.pass = worst <= 1e-8;
  res.statistic = "max_grid_error=" + fmt(worst);
  res.report = {{"max_grid_error", worst}, {"grid_points", 201}};
  return res;
}

// 3. Bundle certificates satisfy the value/point/gradient bounds across the
//    epsilon grid on every suite problem; an injected violation is flagged.
CriterionResult inexact_prox_bounds(std::uint64_t seed) {
  CriterionResult res{3, "inexact_prox_bounds", false, "", {}};
  CounterRng rng(seed, 13);
  const Regularizer reg = Regularizer::quadratic(1.0);
  const std::vector<double> epsilons{1e-1, 1e-2, 1e-4, 1e-6};

  bool pass = true;
  int total_checks = 0;
  int total_violations = 0;
  nlohmann::json per_problem = nlohmann::json::object();
  auto suite = make_problem_suite();
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const auto grid =
        lemma2_grid(suite[i], reg, epsilons, 100, 5.0, rng.stream(static_cast<std::uint64_t>(i)));
    total_checks += grid.checks;
    total_violations += grid.violations;
    pass = pass && grid.violations == 0;
    per_problem[suite[i].name] = lemma2_grid_to_json(grid);
  }

  // negative control: a point bound violated by construction must be flagged
  const BenchmarkProblem l1 = make_l1_problem(5);
  CounterRng ctrl = rng.stream(99);
  Vector x = ctrl.uniform_vector(5, -5.0, 5.0);
  const double eps = 1e-2;
  const EnvelopeValue exact = exact_envelope(l1, reg, x, 1e-12);
  const double bound = std::sqrt(reg.lambda() * eps / reg.beta());
  ProxCertificate bad;
  bad.p_a = exact.p + 1.5 * bound * ctrl.unit_vector(5);
  bad.f_phi_a = l1.oracle.value(bad.p_a) + reg.phi(bad.p_a, x) / reg.lambda();
  bad.g_a = reg.grad_x(bad.p_a, x) / reg.lambda();
  bad.epsilon = eps;
  bad.lower_bound = exact.f_phi;
  bad.backend = ProxBackend::bundle;
  const Lemma2Report control = verify_lemma2(l1, reg, x, eps, exact, bad, 1e-12);
  const bool control_flagged = !control.point_bound_ok;
  pass = pass && control_flagged;

  res.pass = pass;
  res.statistic = "violations=" + std::to_string(total_violations) + "/" +
                  std::to_string(total_checks) + ",control_flagged=" +
                  (control_flagged ? "yes" : "no");
  res.report = {{"per_problem", per_problem},
                {"checks", total_checks},
                {"violations", total_violations},
                {"negative_control_flagged", control_flagged},
                {"negative_control", lemma2_report_to_json(control)}};
  return res;
}

// 4. Envelope-gradient Lipschitz constant: sampled difference quotients stay
//    under L^2/(4 beta lambda); the quadratic-coupling bound at lambda 1 is
//    exactly one.
CriterionResult envelope_lipschitz_constant(std::uint64_t seed) {
  CriterionResult res{4, "envelope_lipschitz_constant", false, "", {}};
  CounterRng rng(seed, 14);
  bool pass = lipschitz_of_envelope(Regularizer::quadratic(1.0)) == 1.0;
  double worst_fill = 0.0;  // largest max_ratio/bound observed
  nlohmann::json runs = nlohmann::json::array();

  std::vector<BenchmarkProblem> problems;
  problems.push_back(make_l1_problem(5));
  problems.push_back(make_maxq_problem(4));
  std::uint64_t stream = 0;
  for (const auto& problem : problems) {
    for (double lambda : {0.5, 1.0, 4.0}) {
      const Regularizer reg = Regularizer::quadratic(lambda);
      const auto probe = lipschitz_probe(problem, reg, 1000, -5.0, 5.0, rng.stream(stream++));
      pass = pass && probe.pass;
      worst_fill = std::max(worst_fill, probe.max_ratio / probe.bound);
      nlohmann::json entry = lipschitz_result_to_json(probe);
      entry["problem"] = problem.name;
      entry["lambda"] = lambda;
      runs.push_back(std::move(entry));
    }
  }
  res.pass = pass;
  res.statistic = "worst_ratio_over_bound=" + fmt(worst_fill);
  res.report = {{"runs", std::move(runs)},
                {"bound_at_lambda1_exactly_one",
                 lipschitz_of_envelope(Regularizer::quadratic(1.0)) == 1.0}};
  return res;
}

// 5. Optimality residuals vanish at each suite problem's minimizer and stay
//    visibly nonzero at points at least 0.1 away.
CriterionResult optimality_certificates(std::uint64_t seed) {
  CriterionResult res{5, "optimality_certificates", false, "", {}};
  CounterRng rng(seed, 15);
  const Regularizer reg = Regularizer::quadratic(1.0);

  bool pass = true;
  double worst_at_min = 0.0;
  double worst_min_away = std::numeric_limits<double>::infinity();
  nlohmann::json per_problem = nlohmann::json::object();
  auto suite = make_problem_suite();
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const auto& problem = suite[i];
    const Vector& ref = *problem.known_minimizer;
    const OptimalityReport at_min = optimality_report(problem, reg, ref, 1e-8);
    pass = pass && at_min.max_residual() <= 1e-6;
    worst_at_min = std::max(worst_at_min, at_min.max_residual());

    CounterRng prng = rng.stream(static_cast<std::uint64_t>(i));
    nlohmann::json away = nlohmann::json::array();
    for (int t = 0; t < 10; ++t) {
      const double radius = prng.uniform(0.1, 1.0);
      Vector x = ref + radius * prng.unit_vector(problem.oracle.dimension);
      const OptimalityReport rep = optimality_report(problem, reg, x, 1e-8);
      pass = pass && rep.max_residual() >= 1e-2;
      worst_min_away = std::min(worst_min_away, rep.max_residual());
      away.push_back(optimality_report_to_json(rep));
    }
    per_problem[problem.name] = {{"at_minimizer", optimality_report_to_json(at_min)},
                                 {"away", std::move(away)}};
  }
  res.pass = pass;
  res.statistic =
      "worst_at_min=" + fmt(worst_at_min) + ",min_away=" + fmt(worst_min_away);
  res.report = std::move(per_problem);
  return res;
}

// 6. Default halving-mode runs converge on every suite problem from random
//    starts, with every accepted step passing the post-hoc audit.
CriterionResult global_convergence(std::uint64_t seed) {
  CriterionResult res{6, "global_convergence", false, "", {}};
  CounterRng rng(seed, 16);
  const Regularizer reg = Regularizer::quadratic(1.0);
  SolverConfig cfg;  // library defaults

  bool pass = true;
  double worst_gap = 0.0;
  int worst_iters = 0;
  int total_violations = 0;
  nlohmann::json per_problem = nlohmann::json::object();
  auto suite = make_problem_suite();
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const auto& problem = suite[i];
    CounterRng prng = rng.stream(static_cast<std::uint64_t>(i));
    nlohmann::json runs = nlohmann::json::array();
    for (int run = 0; run < 10; ++run) {
      const Vector x0 = prng.uniform_vector(problem.oracle.dimension, -10.0, 10.0);
      const SolveResult sol = solve(problem, reg, x0, cfg);
      const double gap = problem.oracle.value(sol.x_final) - *problem.known_minimum;
      const int iters = sol.trace.empty() ? 0 : sol.trace.back().k;
      const auto audit = check_acceptance_posthoc(sol.trace, problem, reg, cfg);
      const bool run_ok = sol.status == SolveStatus::converged && gap <= 1e-6 &&
                          iters <= 200 && audit.violations == 0;
      pass = pass && run_ok;
      worst_gap = std::max(worst_gap, gap);
      worst_iters = std::max(worst_iters, iters);
      total_violations += audit.violations;
      runs.push_back({{"status", to_string(sol.status)},
                      {"f_gap", gap},
                      {"iterations", iters},
                      {"posthoc_violations", audit.violations}});
    }
    per_problem[problem.name] = std::move(runs);
  }
  res.pass = pass;
  res.statistic = "worst_f_gap=" + fmt(worst_gap) + ",worst_iters=" +
                  std::to_string(worst_iters) + ",audit_violations=" +
                  std::to_string(total_violations);
  res.report = std::move(per_problem);
  return res;
}

// 7. Two-step rate on the composite problem in superlinear-epsilon mode, with
//    unit steps accepted late, against a gradient-descent control that stays
//    linear.
CriterionResult superlinear_rate(std::uint64_t seed) {
  CriterionResult res{7, "superlinear_rate", false, "", {}};
  CounterRng rng(seed, 17);
  const BenchmarkProblem problem = make_composite_problem(10, 1.0, 90202);
  const Regularizer reg = Regularizer::quadratic(1.0);
  const Vector& ref = *problem.known_minimizer;
  const Vector x0 = rng.uniform_vector(10, -10.0, 10.0);

  SolverConfig newton_cfg;
  newton_cfg.eps_mode = EpsMode::superlinear;
  newton_cfg.grad_tol = 1e-9;
  newton_cfg.eps_tol = 1e-12;
  newton_cfg.damping.mode = DampingSchedule::Mode::gradient_proportional;
  newton_cfg.ga.delta = 0.45;
  newton_cfg.ga.initial_step = 1.0;

  bool pass = true;
  double worst_tail2 = 0.0;
  double newton_tail1 = 0.0;
  nlohmann::json runs = nlohmann::json::object();
  for (RateCondition cond :
       {RateCondition::eps_vs_current_grad, RateCondition::eps_vs_previous_grad}) {
    SolverConfig cfg = newton_cfg;
    cfg.rate_condition = cond;
    const SolveResult sol = solve(problem, reg, x0, cfg);
    const bool converged = sol.status == SolveStatus::converged;
    pass = pass && converged;
    const RateReport rate = rate_report(sol.trace, ref);
    pass = pass && rate.tail_max_2step <= 0.1;
    worst_tail2 = std::max(worst_tail2, rate.tail_max_2step);
    newton_tail1 = std::max(newton_tail1, tail_max(rate.ratios_1step, 3));

    // unit step accepted on the last five completed iterations
    std::vector<double> taus;
    for (const auto& rec : sol.trace)
      if (rec.tau) taus.push_back(*rec.tau);
    bool unit_tail = taus.size() >= 5;
    for (std::size_t i = taus.size() >= 5 ? taus.size() - 5 : 0; i < taus.size(); ++i)
      unit_tail = unit_tail && taus[i] == 1.0;
    pass = pass && unit_tail;

    const char* key =
        cond == RateCondition::eps_vs_current_grad ? "eps_vs_current_grad" : "eps_vs_previous_grad";
    runs[key] = {{"status", to_string(sol.status)},
                 {"rate", rate_report_to_json(rate)},
                 {"unit_step_tail", unit_tail},
                 {"iterations", sol.trace.empty() ? 0 : sol.trace.back().k}};
  }

  // gradient-descent control: V forced to zero, constant damping
  SolverConfig gd_cfg;
  gd_cfg.curvature = CurvatureMode::none;
  gd_cfg.damping.mode = DampingSchedule::Mode::constant;
  gd_cfg.damping.alpha0 = 1.0;
  gd_cfg.grad_tol = 1e-9;
  gd_cfg.eps_tol = 1e-12;
  const SolveResult gd = solve(problem, reg, x0, gd_cfg);
  const RateReport gd_rate = rate_report(gd.trace, ref);
  const double gd_tail1 = tail_max(gd_rate.ratios_1step, 3);
  pass = pass && gd.status == SolveStatus::converged && gd_tail1 >= 0.2;
  pass = pass && newton_tail1 <= 0.5 * gd_tail1;

  res.pass = pass;
  res.statistic = "tail_max_2step=" + fmt(worst_tail2) + ",gd_tail_1step=" + fmt(gd_tail1);
  res.report = {{"newton", std::move(runs)},
                {"gradient_control",
                 {{"status", to_string(gd.status)},
                  {"tail_1step", gd_tail1},
                  {"rate", rate_report_to_json(gd_rate)}}},
                {"newton_tail_1step", newton_tail1}};
  return res;
}

// 8. Window mechanics: monotone decrease (up to eps slack) with M = 0, and the
//    cumulative merit bound with M = 5.
CriterionResult window_mechanics(std::uint64_t seed) {
  CriterionResult res{8, "window_mechanics", false, "", {}};
  CounterRng rng(seed, 18);
  const BenchmarkProblem problem = make_composite_problem(10, 1.0, 90202);
  const Regularizer reg = Regularizer::quadratic(1.0);
  const Vector x0 = rng.uniform_vector(10, -10.0, 10.0);

  SolverConfig monotone_cfg;
  monotone_cfg.ga.window_cap = 0;
  const SolveResult mono = solve(problem, reg, x0, monotone_cfg);
  bool pass = mono.status == SolveStatus::converged;
  double worst_increase = 0.0;
  for (std::size_t k = 0; k + 1 < mono.trace.size(); ++k) {
    const double slack = mono.trace[k].eps + 1e-12 * std::max(1.0, std::abs(mono.trace[k].f_phi_a));
    const double increase = mono.trace[k + 1].f_phi_a - mono.trace[k].f_phi_a - slack;
    worst_increase = std::max(worst_increase, increase);
    pass = pass && increase <= 0.0;
  }

  SolverConfig window_cfg;  // default M = 5
  const SolveResult nonmono = solve(problem, reg, x0, window_cfg);
  pass = pass && nonmono.status == SolveStatus::converged;
  double worst_bound_excess = 0.0;
  if (!nonmono.trace.empty()) {
    const double v0 = nonmono.trace.front().f_phi_a;
    double eps_sum = 0.0;
    for (std::size_t k = 1; k < nonmono.trace.size(); ++k) {
      eps_sum += nonmono.trace[k - 1].eps;
      const double bound = v0 + eps_sum + 1e-12 * std::max(1.0, std::abs(v0));
      worst_bound_excess = std::max(worst_bound_excess, nonmono.trace[k].f_phi_a - bound);
      pass = pass && nonmono.trace[k].f_phi_a <= bound;
    }
  }

  res.pass = pass;
  res.statistic = "monotone_excess=" + fmt(worst_increase) +
                  ",bound_excess=" + fmt(worst_bound_excess);
  res.report = {{"monotone_status", to_string(mono.status)},
                {"monotone_worst_increase", worst_increase},
                {"window_status", to_string(nonmono.status)},
                {"window_worst_bound_excess", worst_bound_excess}};
  return res;
}

std::string determinism_workload(std::uint64_t seed) {
  std::ostringstream out;
  CounterRng rng(seed, 19);
  const Regularizer reg = Regularizer::quadratic(1.0);

  // bundle-backed solve
  const BenchmarkProblem ma = make_max_affine_problem(3, 6, 90101);
  SolverConfig cfg;
  cfg.eps_tol = 1e-10;
  const Vector x0 = rng.uniform_vector(3, -10.0, 10.0);
  const SolveResult sol = solve(ma, reg, x0, cfg);
  out << solve_summary_to_json(sol, ma).dump() << "\n";
  for (const auto& rec : sol.trace) out << record_to_json(rec).dump() << "\n";

  // bundle certificates against exact envelopes
  const BenchmarkProblem l1 = make_l1_problem(5);
  const auto grid = lemma2_grid(l1, reg, {1e-2, 1e-4}, 20, 5.0, rng.stream(2));
  out << lemma2_grid_to_json(grid).dump() << "\n";

  // superlinear run + rate report
  const BenchmarkProblem comp = make_composite_problem(10, 1.0, 90202);
  SolverConfig scfg;
  scfg.eps_mode = EpsMode::superlinear;
  scfg.grad_tol = 1e-9;
  scfg.eps_tol = 1e-12;
  const Vector x1 = rng.uniform_vector(10, -10.0, 10.0);
  const SolveResult sol2 = solve(comp, reg, x1, scfg);
  out << solve_summary_to_json(sol2, comp).dump() << "\n";
  try {
    out << rate_report_to_json(rate_report(sol2.trace, *comp.known_minimizer)).dump() << "\n";
  } catch (const InsufficientTraceError& err) {
    out << err.what() << "\n";
  }

  // sampled probes
  const BenchmarkProblem maxq = make_maxq_problem(4);
  const auto probe = lipschitz_probe(maxq, reg, 100, -5.0, 5.0, rng.stream(3));
  out << lipschitz_result_to_json(probe).dump() << "\n";
  return out.str();
}

// 9. Two executions of the same seeded workload produce byte-identical output.
CriterionResult determinism(std::uint64_t seed) {
  CriterionResult res{9, "determinism", false, "", {}};
  const std::string first = determinism_workload(seed);
  const std::string second = determinism_workload(seed);
  res.pass = first == second;
  res.statistic = "bytes=" + std::to_string(first.size()) +
                  ",identical=" + (res.pass ? "yes" : "no");
  res.report = {{"bytes", first.size()}, {"identical", res.pass}};
  return res;
}

} // namespace

CriterionResult run_criterion(int index, std::uint64_t seed) {
  switch (index) {
    case 1: return regularizer_axioms(seed);
    case 2: return moreau_consistency(seed);
    case 3: return inexact_prox_bounds(seed);
    case 4: return envelope_lipschitz_constant(seed);
    case 5: return optimality_certificates(seed);
    case 6: return global_convergence(seed);
    case 7: return superlinear_rate(seed);
    case 8: return window_mechanics(seed);
    case 9: return determinism(seed);
    default: throw std::invalid_argument("run_criterion: index must be in 1..9");
  }
}

std::vector<CriterionResult> run_all(std::uint64_t seed) {
  std::vector<CriterionResult> results;
  for (int i = 1; i <= 9; ++i) results.push_back(run_criterion(i, seed));
  return results;
}

int write_suite(std::uint64_t seed, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  const auto results = run_all(seed);

  int failures = 0;
  std::ostringstream csv;
  csv << "criterion,status,statistic\n";
  for (const auto& result : results) {
    if (!result.pass) ++failures;
    nlohmann::json doc{{"criterion", result.index},
                       {"name", result.name},
                       {"pass", result.pass},
                       {"statistic", result.statistic},
                       {"report", result.report}};
    const auto path = out_dir / ("criterion_" + std::to_string(result.index) + ".json");
    std::ofstream file(path);
    if (!file) throw std::runtime_error("write_suite: cannot write " + path.string());
    file << doc.dump(2) << "\n";
    csv << result.index << "," << (result.pass ? "pass" : "fail") << "," << result.statistic
        << "\n";
  }
  const auto summary_path = out_dir / "summary.csv";
  std::ofstream summary(summary_path);
  if (!summary) throw std::runtime_error("write_suite: cannot write " + summary_path.string());
  summary << csv.str();
  return failures;
}

} // namespace phireg::acceptance
