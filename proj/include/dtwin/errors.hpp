#pragma once

#include <stdexcept>
#include <string>

namespace dtwin {

/// Base of every error thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf produced while evaluating a discrete operator.
class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& what, std::size_t cell)
      : Error(what + " (cell " + std::to_string(cell) + ")"), cell_(cell) {}
  std::size_t cell() const noexcept { return cell_; }

 private:
  std::size_t cell_;
};

/// Nonlinear solver gave up; carries the time and last residual norm.
class SolverFailure : public Error {
 public:
  SolverFailure(const std::string& what, double time, double residual)
      : Error(what + " at t=" + std::to_string(time) + " s (residual " +
              std::to_string(residual) + ")"),
        time_(time),
        residual_(residual) {}
  double time() const noexcept { return time_; }
  double residual() const noexcept { return residual_; }

 private:
  double time_;
  double residual_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

class IdentificationError : public Error {
 public:
  using Error::Error;
};

/// Free-run prediction left the admissible output envelope.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t step)
      : Error(what + " at step " + std::to_string(step)), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class ModelFileError : public Error {
 public:
  using Error::Error;
};

class ModelVersionError : public ModelFileError {
 public:
  using ModelFileError::ModelFileError;
};

class ModelChecksumError : public ModelFileError {
 public:
  using ModelFileError::ModelFileError;
};

class ModelParseError : public ModelFileError {
 public:
  using ModelFileError::ModelFileError;
};

}  // namespace dtwin
