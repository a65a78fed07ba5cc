#pragma once

#include <stdexcept>
#include <string>

namespace enaqt {

// Invalid or inconsistent user-supplied configuration (bad network layout,
// malformed config file, incompatible grid). CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numeric failure during a computation (precondition violated, integrator
// accuracy check failed, norm drift). CLI maps this to exit code 3.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace enaqt
