#pragma once

#include <stdexcept>
#include <string>

namespace hjb {

/// Raised when a loss, gradient, or optimizer state turns non-finite.
/// Training catches this and records an aborted run instead of emitting NaNs.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised for malformed run configs (unknown keys, bad values, shape mismatches).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hjb
