// Acceptance gate: runs each verification criterion at its pinned tolerance
// and prints one pass/fail line per criterion. With index arguments, runs only
// those criteria. Exit status is the number of failures.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "phireg/acceptance.hpp"

int main(int argc, char** argv) {
  std::vector<int> indices;
  std::uint64_t seed = 12345;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--seed" && i + 1 < argc) {
      seed = std::strtoull(argv[++i], nullptr, 10);
    } else {
      indices.push_back(std::atoi(arg.c_str()));
    }
  }
  if (indices.empty())
    for (int i = 1; i <= 9; ++i) indices.push_back(i);

  int failures = 0;
  for (int index : indices) {
    const auto result = phireg::acceptance::run_criterion(index, seed);
    std::printf("criterion %d %-28s %s  (%s)\n", result.index, result.name.c_str(),
                result.pass ? "PASS" : "FAIL", result.statistic.c_str());
    std::fflush(stdout);
    if (!result.pass) ++failures;
  }
  return failures;
}
