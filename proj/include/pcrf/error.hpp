#pragma once

#include <stdexcept>
#include <string>

namespace pcrf {

/// Malformed or inconsistent input data (tracking, touches, score files).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pcrf
