#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace offload {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file; carries the 1-based line number of the offending row.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class LookupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when an exhaustive search would be too large to run.
class OracleSizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace offload
