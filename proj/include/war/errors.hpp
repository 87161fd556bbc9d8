#pragma once

#include <stdexcept>
#include <string>

namespace war {

// Error families map onto CLI exit codes (config 2, data 3, numeric 4).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input line; carries the 1-based line number.
class ParseError : public DataError {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : DataError(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Name not present in an externally supplied dictionary.
class LookupError : public DataError {
 public:
  using DataError::DataError;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace war
