#pragma once

#include <stdexcept>
#include <string>

namespace mdpdsf {

// Invalid parameter value (non-positive scale, alpha outside [0,1], ...).
class ParameterDomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Quadrature or optimizer failed to reach its tolerance.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double achieved_error = 0.0)
      : std::runtime_error(what), achieved_error_(achieved_error) {}
  double achieved_error() const noexcept { return achieved_error_; }

 private:
  double achieved_error_;
};

// Refusal to use an estimate whose optimizer did not converge.
class NonConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DesignMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Hessian of the objective is not positive definite at the estimate.
class SingularInformationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UndefinedMetricError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed input file; message carries the row/column location.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t row = 0, std::size_t column = 0)
      : std::runtime_error(what), row_(row), column_(column) {}
  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

}  // namespace mdpdsf
