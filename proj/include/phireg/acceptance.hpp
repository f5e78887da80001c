#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace phireg::acceptance {

struct CriterionResult {
  int index = 0;
  std::string name;
  bool pass = false;
  std::string statistic;  // one-line key figure for the summary table
  nlohmann::json report;
};

/// Runs one verification criterion (1..9). All tolerances are fixed in code;
/// the seed only moves sampled points, never the pass thresholds.
CriterionResult run_criterion(int index, std::uint64_t seed);

std::vector<CriterionResult> run_all(std::uint64_t seed);

/// Writes one JSON report per criterion plus summary.csv into out_dir.
/// Returns the number of failed criteria; throws std::runtime_error when the
/// directory is not writable.
int write_suite(std::uint64_t seed, const std::filesystem::path& out_dir);

} // namespace phireg::acceptance
