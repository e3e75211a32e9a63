#pragma once

#include <stdexcept>
#include <string>

namespace epifit {

// Invalid or inconsistent run configuration. CLI exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Problems with input data: lookup failures, parse errors, empty windows. CLI exit code 3.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failures outside the sampler's divergence handling.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The implicit ODE step failed to converge or produced an invalid state.
struct IntegratorError : NumericError {
  IntegratorError(const std::string& msg, int day)
      : NumericError(msg + " (day " + std::to_string(day) + ")"), day(day) {}
  int day;
};

}  // namespace epifit
