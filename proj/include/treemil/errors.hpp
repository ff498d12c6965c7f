#pragma once

#include <stdexcept>
#include <string>

namespace treemil {

// Shape disagreement between tensor operands.
struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Math domain violation (log of non-positive, etc).
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// API precondition violated by the caller.
struct ContractError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input file.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structurally invalid propagation tree.
struct StructureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid configuration value.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// NaN/Inf produced, or training diverged.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Metric cannot be computed on the given inputs.
struct MetricError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem failure.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace treemil
