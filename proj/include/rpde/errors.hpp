#pragma once

#include <stdexcept>
#include <string>

namespace rpde {

/// A computation produced a NaN/Inf or a solver failed to converge.
class NumericFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An API was called with arguments that violate its preconditions.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A run configuration or problem definition is inconsistent.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rpde
