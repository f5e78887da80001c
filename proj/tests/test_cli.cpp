#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "phireg/runner.hpp"

using namespace phireg;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("phireg_test_" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& body) {
  const fs::path p = dir / name;
  std::ofstream out(p);
  out << body;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(const std::string& command, const fs::path& config, std::uint64_t seed,
        const std::optional<std::string>& out = std::nullopt) {
  CliOptions opts;
  opts.command = command;
  opts.config_path = config.string();
  opts.seed = seed;
  opts.out_path = out;
  return run_command(opts);
}

const char* kSolveConfig = R"({
  "problem": {"kind": "l1", "dimension": 4},
  "regularizer": {"type": "quadratic", "lambda": 1.0},
  "solver": {"max_iters": 100},
  "x0": [3.0, -2.0, 0.5, 1.5]
})";

} // namespace

TEST_CASE("solve command writes a converged trace deterministically") {
  TempDir dir;
  const fs::path config = write_file(dir.path, "run.json", kSolveConfig);

  const std::string out1 = (dir.path / "a").string();
  const std::string out2 = (dir.path / "b").string();
  CHECK(run("solve", config, 5, out1) == 0);
  CHECK(run("solve", config, 5, out2) == 0);

  const std::string trace1 = slurp(out1 + ".trace.jsonl");
  CHECK(trace1 == slurp(out2 + ".trace.jsonl"));
  CHECK(slurp(out1 + ".summary.json") == slurp(out2 + ".summary.json"));
  REQUIRE(!trace1.empty());

  const nlohmann::json summary = nlohmann::json::parse(slurp(out1 + ".summary.json"));
  CHECK(summary.at("status") == "converged");

  // every line of the trace parses as a record
  std::istringstream lines(trace1);
  std::string line;
  int records = 0;
  while (std::getline(lines, line)) {
    const nlohmann::json rec = nlohmann::json::parse(line);
    CHECK(rec.contains("k"));
    CHECK(rec.contains("f_phi_a"));
    ++records;
  }
  CHECK(records >= 2);
}

TEST_CASE("missing lambda is a configuration error") {
  TempDir dir;
  const fs::path config = write_file(dir.path, "bad.json", R"({
    "problem": {"kind": "abs", "dimension": 1},
    "regularizer": {"type": "quadratic"},
    "x0": [1.0]
  })");
  CHECK(run("solve", config, 1) == 2);
}

TEST_CASE("malformed JSON is a configuration error") {
  TempDir dir;
  const fs::path config = write_file(dir.path, "broken.json", "{\"problem\": [,]}");
  CHECK(run("solve", config, 1) == 2);
}

TEST_CASE("missing config file is a configuration error") {
  CliOptions opts;
  opts.command = "solve";
  opts.config_path = "/nonexistent/nope.json";
  CHECK(run_command(opts) == 2);
  opts.config_path.reset();
  CHECK(run_command(opts) == 2);
  opts.command = "frobnicate";
  opts.config_path = "/nonexistent/nope.json";
  CHECK(run_command(opts) == 2);
}

TEST_CASE("verify commands succeed on healthy configurations") {
  TempDir dir;

  const fs::path reg_cfg = write_file(dir.path, "reg.json", R"({
    "regularizer": {"type": "metric", "lambda": 1.0, "M": [[3.0, 0.0], [0.0, 0.5]]},
    "n_samples": 300
  })");
  CHECK(run("verify-regularizer", reg_cfg, 3, (dir.path / "reg_report.json").string()) == 0);
  const nlohmann::json reg_report = nlohmann::json::parse(slurp(dir.path / "reg_report.json"));
  CHECK(reg_report.at("pass") == true);
  CHECK(reg_report.at("failures").empty());

  const fs::path lemma_cfg = write_file(dir.path, "lemma.json", R"({
    "problem": {"kind": "l1", "dimension": 3},
    "regularizer": {"type": "quadratic", "lambda": 1.0},
    "epsilons": [1e-2, 1e-4],
    "n_points": 10
  })");
  CHECK(run("verify-lemma2", lemma_cfg, 3, (dir.path / "lemma_report.json").string()) == 0);

  const fs::path lip_cfg = write_file(dir.path, "lip.json", R"({
    "problem": {"kind": "abs", "dimension": 1},
    "regularizer": {"type": "quadratic", "lambda": 1.0},
    "n_pairs": 200
  })");
  CHECK(run("verify-lipschitz", lip_cfg, 3, (dir.path / "lip_report.json").string()) == 0);
  const nlohmann::json lip_report = nlohmann::json::parse(slurp(dir.path / "lip_report.json"));
  CHECK(lip_report.at("bound") == 1.0);
}

TEST_CASE("rate command produces a report on the composite problem") {
  TempDir dir;
  const fs::path config = write_file(dir.path, "rate.json", R"({
    "problem": {"kind": "composite", "dimension": 10, "parameters": {"mu": 1.0}},
    "regularizer": {"type": "quadratic", "lambda": 1.0},
    "solver": {"eps_mode": "superlinear", "grad_tol": 1e-9, "eps_tol": 1e-12}
  })");
  CHECK(run("rate", config, 21, (dir.path / "rate.json.out").string()) == 0);
  const nlohmann::json doc = nlohmann::json::parse(slurp(dir.path / "rate.json.out"));
  CHECK(doc.at("summary").at("status") == "converged");
  CHECK(doc.at("rate").contains("tail_max_2step"));
}

TEST_CASE("solve without convergence exits with status 1") {
  TempDir dir;
  const fs::path config = write_file(dir.path, "short.json", R"({
    "problem": {"kind": "l1", "dimension": 4},
    "regularizer": {"type": "quadratic", "lambda": 1.0},
    "solver": {"max_iters": 1},
    "x0": [3.0, -2.0, 0.5, 1.5]
  })");
  CHECK(run("solve", config, 5) == 1);
}
