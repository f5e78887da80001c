#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace phireg {

/// Parsed command line for the `solver` tool. Exit-code contract:
/// 0 success, 1 solver-failure or failed verification, 2 malformed
/// configuration or I/O error.
struct CliOptions {
  std::string command;  // solve | verify-regularizer | verify-lemma2 |
                        // verify-lipschitz | rate | suite
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;  // --seed beats the config's "seed"; default 12345
  std::optional<std::string> out_path;
};

int run_command(const CliOptions& options);

} // namespace phireg
