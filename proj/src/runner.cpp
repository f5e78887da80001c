#include "phireg/runner.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "phireg/acceptance.hpp"
#include "phireg/config_io.hpp"
#include "phireg/diagnostics.hpp"
#include "phireg/driver.hpp"
#include "phireg/errors.hpp"
#include "phireg/oracle.hpp"
#include "phireg/rng.hpp"

namespace phireg {

namespace {

struct ConfigExit : std::runtime_error {
  using std::runtime_error::runtime_error;
};

nlohmann::json load_config(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ConfigExit("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << file.rdbuf();
  const std::string text = buffer.str();
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& err) {
    // turn the byte offset into a line:column anchor
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < err.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigExit(path + ":" + std::to_string(line) + ":" + std::to_string(col) +
                     ": " + err.what());
  }
}

void write_json(const std::optional<std::string>& out_path, const nlohmann::json& doc) {
  if (out_path) {
    std::ofstream file(*out_path);
    if (!file) throw ConfigExit("cannot write output file '" + *out_path + "'");
    file << doc.dump(2) << "\n";
  } else {
    std::cout << doc.dump(2) << "\n";
  }
}

Vector resolve_x0(const nlohmann::json& cfg, const BenchmarkProblem& problem,
                  std::uint64_t seed) {
  if (cfg.contains("x0")) {
    Vector x0 = vector_from_json_array(cfg.at("x0"));
    if (x0.size() != problem.oracle.dimension)
      throw ConfigError("x0: dimension does not match the problem");
    return x0;
  }
  CounterRng rng(seed, 7001);
  return rng.uniform_vector(problem.oracle.dimension, -10.0, 10.0);
}

SolverConfig resolve_solver(const nlohmann::json& cfg) {
  SolverConfig solver_cfg = cfg.contains("solver") ? solver_config_from_json(cfg.at("solver"))
                                                   : SolverConfig{};
  if (solver_cfg.ga.delta >= 0.5)
    std::cerr << "warning: delta >= 0.5, late unit-step acceptance is not guaranteed\n";
  return solver_cfg;
}

int cmd_solve(const nlohmann::json& cfg, std::uint64_t seed,
              const std::optional<std::string>& out) {
  if (!cfg.contains("problem")) throw ConfigError("config: missing 'problem'");
  if (!cfg.contains("regularizer")) throw ConfigError("config: missing 'regularizer'");
  const BenchmarkProblem problem = problem_from_json(cfg.at("problem"));
  const Regularizer reg = regularizer_from_json(cfg.at("regularizer"));
  const SolverConfig solver_cfg = resolve_solver(cfg);
  const Vector x0 = resolve_x0(cfg, problem, seed);

  const SolveResult result = solve(problem, reg, x0, solver_cfg);
  const nlohmann::json summary = solve_summary_to_json(result, problem);
  if (out) {
    std::ofstream trace_file(*out + ".trace.jsonl");
    if (!trace_file) throw ConfigExit("cannot write '" + *out + ".trace.jsonl'");
    for (const auto& rec : result.trace) trace_file << record_to_json(rec).dump() << "\n";
    std::ofstream summary_file(*out + ".summary.json");
    if (!summary_file) throw ConfigExit("cannot write '" + *out + ".summary.json'");
    summary_file << summary.dump(2) << "\n";
  } else {
    std::cout << summary.dump(2) << "\n";
  }
  return result.status == SolveStatus::converged ? 0 : 1;
}

int cmd_verify_regularizer(const nlohmann::json& cfg, std::uint64_t seed,
                           const std::optional<std::string>& out) {
  if (!cfg.contains("regularizer")) throw ConfigError("config: missing 'regularizer'");
  const Regularizer reg = regularizer_from_json(cfg.at("regularizer"));
  int dimension = cfg.value("dimension", 0);
  if (dimension == 0)
    dimension = reg.kind() == Regularizer::Kind::metric
                    ? static_cast<int>(reg.metric_matrix().rows())
                    : 3;
  const int n_samples = cfg.value("n_samples", 1000);
  const double box = cfg.value("box", 5.0);

  const auto rep = check_regularizer_properties(reg, dimension, n_samples, box,
                                                CounterRng(seed, 7002));
  const bool pass = rep.pass(1e-9, 1e-6);
  nlohmann::json doc = regularizer_properties_to_json(rep);
  doc["pass"] = pass;
  nlohmann::json failures = nlohmann::json::array();
  if (rep.nonneg_min < 0.0 || rep.offdiag_phi_min <= 0.0 || rep.diagonal_phi_max > 1e-9)
    failures.push_back("nonnegativity_with_diagonal_zero");
  if (rep.strong_convexity_worst < -1e-9) failures.push_back("strong_convexity");
  if (rep.lipschitz_excess_worst > 1e-9) failures.push_back("gradient_lipschitz");
  if (rep.antisymmetry_worst > 1e-9) failures.push_back("gradient_antisymmetry");
  if (rep.grad_fd_rel_error > 1e-6) failures.push_back("gradient_finite_difference");
  doc["failures"] = std::move(failures);
  write_json(out, doc);
  return pass ? 0 : 1;
}

int cmd_verify_lemma2(const nlohmann::json& cfg, std::uint64_t seed,
                      const std::optional<std::string>& out) {
  if (!cfg.contains("problem")) throw ConfigError("config: missing 'problem'");
  if (!cfg.contains("regularizer")) throw ConfigError("config: missing 'regularizer'");
  const BenchmarkProblem problem = problem_from_json(cfg.at("problem"));
  const Regularizer reg = regularizer_from_json(cfg.at("regularizer"));
  std::vector<double> epsilons{1e-1, 1e-2, 1e-4, 1e-6};
  if (cfg.contains("epsilons")) epsilons = cfg.at("epsilons").get<std::vector<double>>();
  const int n_points = cfg.value("n_points", 100);
  const double box = cfg.value("box", 5.0);
  BundleOptions options;
  options.max_cuts = cfg.value("max_cuts", options.max_cuts);

  const auto grid =
      lemma2_grid(problem, reg, epsilons, n_points, box, CounterRng(seed, 7003), options);
  nlohmann::json doc = lemma2_grid_to_json(grid);
  doc["pass"] = grid.violations == 0;
  if (grid.violations > 0) doc["failed_invariant"] = "inexact_prox_error_bounds";
  write_json(out, doc);
  return grid.violations == 0 ? 0 : 1;
}

int cmd_verify_lipschitz(const nlohmann::json& cfg, std::uint64_t seed,
                         const std::optional<std::string>& out) {
  if (!cfg.contains("problem")) throw ConfigError("config: missing 'problem'");
  if (!cfg.contains("regularizer")) throw ConfigError("config: missing 'regularizer'");
  const BenchmarkProblem problem = problem_from_json(cfg.at("problem"));
  const Regularizer reg = regularizer_from_json(cfg.at("regularizer"));
  const int n_pairs = cfg.value("n_pairs", 1000);
  double box_lo = -5.0, box_hi = 5.0;
  if (cfg.contains("box")) {
    const auto& box = cfg.at("box");
    if (!box.is_array() || box.size() != 2) throw ConfigError("box: expected [lo, hi]");
    box_lo = box[0].get<double>();
    box_hi = box[1].get<double>();
  }
  const auto probe =
      lipschitz_probe(problem, reg, n_pairs, box_lo, box_hi, CounterRng(seed, 7004));
  nlohmann::json doc = lipschitz_result_to_json(probe);
  if (!probe.pass) doc["failed_invariant"] = "envelope_gradient_lipschitz_bound";
  write_json(out, doc);
  return probe.pass ? 0 : 1;
}

int cmd_rate(const nlohmann::json& cfg, std::uint64_t seed,
             const std::optional<std::string>& out) {
  if (!cfg.contains("problem")) throw ConfigError("config: missing 'problem'");
  if (!cfg.contains("regularizer")) throw ConfigError("config: missing 'regularizer'");
  const BenchmarkProblem problem = problem_from_json(cfg.at("problem"));
  if (!problem.known_minimizer)
    throw ConfigError("rate: problem carries no reference minimizer");
  const Regularizer reg = regularizer_from_json(cfg.at("regularizer"));
  const SolverConfig solver_cfg = resolve_solver(cfg);
  const Vector x0 = resolve_x0(cfg, problem, seed);

  const SolveResult result = solve(problem, reg, x0, solver_cfg);
  nlohmann::json doc{{"summary", solve_summary_to_json(result, problem)}};
  bool ok = result.status == SolveStatus::converged;
  try {
    doc["rate"] = rate_report_to_json(rate_report(result.trace, *problem.known_minimizer));
  } catch (const InsufficientTraceError& err) {
    doc["rate"] = nullptr;
    doc["rate_error"] = err.what();
    ok = false;
  }
  write_json(out, doc);
  return ok ? 0 : 1;
}

int cmd_suite(std::uint64_t seed, const std::optional<std::string>& out) {
  const std::string dir = out.value_or("suite_out");
  int failures = 0;
  try {
    failures = acceptance::write_suite(seed, dir);
  } catch (const std::runtime_error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
  // one line per criterion, straight from the freshly written summary
  std::ifstream summary(std::filesystem::path(dir) / "summary.csv");
  std::string line;
  std::getline(summary, line);  // header
  while (std::getline(summary, line)) std::cout << line << "\n";
  return failures == 0 ? 0 : 1;
}

} // namespace

int run_command(const CliOptions& options) {
  try {
    if (options.command == "suite") return cmd_suite(options.seed.value_or(12345), options.out_path);
    if (!options.config_path) {
      std::cerr << "error: --config is required for '" << options.command << "'\n";
      return 2;
    }
    const nlohmann::json cfg = load_config(*options.config_path);
    std::uint64_t seed = 12345;
    if (cfg.contains("seed")) seed = cfg.at("seed").get<std::uint64_t>();
    if (options.seed) seed = *options.seed;
    if (options.command == "solve") return cmd_solve(cfg, seed, options.out_path);
    if (options.command == "verify-regularizer")
      return cmd_verify_regularizer(cfg, seed, options.out_path);
    if (options.command == "verify-lemma2") return cmd_verify_lemma2(cfg, seed, options.out_path);
    if (options.command == "verify-lipschitz")
      return cmd_verify_lipschitz(cfg, seed, options.out_path);
    if (options.command == "rate") return cmd_rate(cfg, seed, options.out_path);
    std::cerr << "error: unknown command '" << options.command << "'\n";
    return 2;
  } catch (const ConfigExit& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const ConfigError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
}

} // namespace phireg
