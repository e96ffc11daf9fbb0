#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace llmprior {

// Process exit codes; stable contract for scripting.
enum class ExitCode : int {
  ok = 0,
  validation = 1,
  numeric = 2,
  transport = 3,
  io = 4,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept = 0;
};

// ---------------------------------------------------------------------------
// Validation family (exit 1)

class ValidationError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::validation; }
};

class ArgumentError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Missing column, wrong JSON type, unknown enum value. `field` names the
// offending column or JSON path.
class SchemaError : public ValidationError {
 public:
  SchemaError(std::string field, const std::string& what);
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EmptyDataError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class LookupError : public ValidationError {
 public:
  LookupError(const std::string& what, std::vector<std::string> available);
  const std::vector<std::string>& available() const noexcept { return available_; }

 private:
  std::vector<std::string> available_;
};

// Malformed JSON (line/column when known) or an LLM response with no usable
// prior sets. `raw` keeps the full input text for manual recovery.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::string raw, std::size_t line = 0, std::size_t column = 0);
  const std::string& raw() const noexcept { return raw_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::string raw_;
  std::size_t line_;
  std::size_t column_;
};

class FoldError : public ValidationError {
 public:
  FoldError(int fold, const std::string& what);
  int fold() const noexcept { return fold_; }

 private:
  int fold_;
};

// ---------------------------------------------------------------------------
// Numeric family (exit 2)

class NumericError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::numeric; }
};

class SingularMatrixError : public NumericError {
 public:
  using NumericError::NumericError;
};

enum class NonConvergenceCause { iteration_cap, divergence };

class NonConvergenceError : public NumericError {
 public:
  NonConvergenceError(NonConvergenceCause cause, int iterations, const std::string& what);
  NonConvergenceCause cause() const noexcept { return cause_; }
  int iterations() const noexcept { return iterations_; }

 private:
  NonConvergenceCause cause_;
  int iterations_;
};

// Zero residual variance. The least-squares coefficients are still carried.
class DegenerateDataError : public NumericError {
 public:
  DegenerateDataError(const std::string& what, std::vector<double> coefficients);
  const std::vector<double>& coefficients() const noexcept { return coefficients_; }

 private:
  std::vector<double> coefficients_;
};

class BootstrapFailureError : public NumericError {
 public:
  using NumericError::NumericError;
};

// ---------------------------------------------------------------------------
// Transport family (exit 3)

enum class TransportFailure { auth, timeout, status, empty_response, connection };

class TransportError : public Error {
 public:
  TransportError(TransportFailure kind, int status, int attempts, std::string body, const std::string& what);
  ExitCode exit_code() const noexcept override { return ExitCode::transport; }
  TransportFailure kind() const noexcept { return kind_; }
  int status() const noexcept { return status_; }
  int attempts() const noexcept { return attempts_; }
  const std::string& body() const noexcept { return body_; }

 private:
  TransportFailure kind_;
  int status_;
  int attempts_;
  std::string body_;
};

// ---------------------------------------------------------------------------
// I/O family (exit 4)

class IoError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::io; }
};

}  // namespace llmprior
