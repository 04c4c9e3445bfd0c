#pragma once

#include <stdexcept>
#include <string>

namespace tlunet {

/// Base of every error raised by the library. `exit_code()` is the CLI
/// status the error maps to (1 validation/config, 2 IO, 3 numeric).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 1; }
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed input text; the message names the offending line.
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DecodeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DegenerateDataError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ConstructionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Weight archive does not fit the model (missing tensor, shape mismatch).
class LoadError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class IoError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

class NumericError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

}  // namespace tlunet
