#pragma once

#include <stdexcept>
#include <string>

namespace phireg {

/// Thrown when a search direction is zero or not a strict descent direction.
struct InvalidDirectionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Thrown by rate diagnostics when the trace has too few usable records.
struct InsufficientTraceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed or schema-violating configuration input.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

} // namespace phireg
