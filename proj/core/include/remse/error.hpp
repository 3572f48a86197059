#pragma once

#include <stdexcept>
#include <string>

namespace remse {

/// Incompatible matrix/vector dimensions.
class ShapeError : public std::runtime_error {
public:
  explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid user-supplied configuration (hyper-parameters, generator settings).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent dataset content on disk or in memory.
class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Numeric failure: divergence, non-finite values, degenerate inputs.
class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace remse
