#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace emoesg {

/// Invalid run configuration or parameter bounds. Maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data. Maps to CLI exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;

  /// Error tied to a location in an input file (line numbers are 1-based).
  static DataError at(const std::string& source, std::size_t line, const std::string& what) {
    return DataError(source + ":" + std::to_string(line) + ": " + what);
  }
};

}  // namespace emoesg
