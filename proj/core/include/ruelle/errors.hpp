#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ruelle {

// Bad arguments or malformed configuration (CLI maps these to exit code 2).
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A function produced a non-finite value; carries the offending location.
struct EvaluationError : std::runtime_error {
  explicit EvaluationError(const std::string& msg, std::string where = {})
      : std::runtime_error(where.empty() ? msg : msg + " at " + where),
        location(std::move(where)) {}
  std::string location;
};

// An iterative solve failed to reach tolerance (CLI maps these to exit code 3).
struct ConvergenceError : std::runtime_error {
  ConvergenceError(const std::string& msg, std::vector<double> history)
      : std::runtime_error(msg), residual_history(std::move(history)) {}
  std::vector<double> residual_history;
};

// A precondition outside the supported cases (e.g. a stationarity check that
// only applies to two-coordinate potentials).
struct UnsupportedCaseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ruelle
