#pragma once

#include <stdexcept>
#include <string>

namespace transducer {

// Base of every error raised by the library. The CLI maps ConfigError to
// exit code 2 and everything else to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input that violates a schema or a documented precondition.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Operation requested in a regime the model does not cover (e.g. a
// blue-detuned pump for a frequency-domain conversion spectrum).
class InvalidModeError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

// Division by a quantity that must be nonzero; names the operand.
class DivisionError : public NumericalError {
 public:
  explicit DivisionError(const std::string& operand)
      : NumericalError("division by zero operand '" + operand + "'"), operand_(operand) {}
  const std::string& operand() const { return operand_; }

 private:
  std::string operand_;
};

// Measured data carry no usable signal (e.g. variance ratio <= 1).
class NoSignalError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace transducer
