#pragma once

#include <stdexcept>
#include <string>

namespace spcp {

/// Invalid argument to a library routine (bad shape, non-finite data, negative radius, ...).
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// A solver or experiment was configured inconsistently.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// An outer driver could not make progress (e.g. flat value function).
class DriverError : public std::runtime_error {
 public:
  explicit DriverError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace spcp
