#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gls_granger {

/// Raised for precondition violations on user-supplied arguments.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Base for failures that originate in floating-point computation rather than bad input.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * @brief Cholesky factorization hit a non-positive pivot.
 *
 * `pivot()` is the zero-based row at which the factorization stopped.
 */
class NotPositiveDefinite : public NumericalError {
 public:
  NotPositiveDefinite(std::size_t pivot, double value)
      : NumericalError("matrix is not positive definite: pivot " + std::to_string(pivot) +
                       " has value " + std::to_string(value)),
        pivot_(pivot),
        value_(value) {}

  [[nodiscard]] std::size_t pivot() const noexcept { return pivot_; }
  [[nodiscard]] double pivot_value() const noexcept { return value_; }

 private:
  std::size_t pivot_;
  double value_;
};

/// The regression design does not have full column rank.
class CollinearDesign : public NumericalError {
 public:
  explicit CollinearDesign(std::size_t column)
      : NumericalError("design matrix is rank deficient at column " + std::to_string(column)),
        column_(column) {}

  [[nodiscard]] std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

/// Quantities that must be ordered by construction came out in the wrong order.
class NumericalInconsistency : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Malformed tabular input. Row and column are one-based; zero means "not applicable".
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t column)
      : std::runtime_error(format(what, row, column)), row_(row), column_(column) {}

  [[nodiscard]] std::size_t row() const noexcept { return row_; }
  [[nodiscard]] std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t row, std::size_t column) {
    std::string out = what;
    if (row != 0) out += " (row " + std::to_string(row);
    if (column != 0) out += (row != 0 ? ", column " : " (column ") + std::to_string(column);
    if (row != 0 || column != 0) out += ")";
    return out;
  }

  std::size_t row_;
  std::size_t column_;
};

}  // namespace gls_granger
