#pragma once

#include <stdexcept>
#include <string>

namespace opdnp {

struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Raised when a denominator built from rates vanishes.
struct DivisionByZero : std::domain_error {
  using std::domain_error::domain_error;
};

struct SolverInstability : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FitDegenerate : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace opdnp
