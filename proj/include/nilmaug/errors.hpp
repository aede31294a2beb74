#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nilmaug {

// Error families map one-to-one onto the CLI exit codes (2, 3, 4).

/// Invalid parameters, option combinations or config files.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input data that cannot be used: unparseable files, misaligned grids,
/// missing traces.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parse failure at a known location in an input file.
class IngestError : public DataError {
 public:
  IngestError(const std::string& path, std::size_t line, const std::string& what)
      : DataError(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Linear-algebra failures (singular systems, non-finite results).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nilmaug
