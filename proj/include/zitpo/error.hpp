#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace zitpo {

/// Argument outside the support or parameter space of a distribution.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Mismatched vector / matrix shapes.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Non-finite evaluation of an objective or a link function.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Problem with input data. Carries the 0-based data row and the column name
/// when they are known, so callers can point at the offending cell.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what, std::optional<std::size_t> row = {},
                     std::string column = {})
      : std::runtime_error(format(what, row, column)), row_(row), column_(std::move(column)) {}

  std::optional<std::size_t> row() const { return row_; }
  const std::string& column() const { return column_; }

 private:
  static std::string format(const std::string& what, std::optional<std::size_t> row,
                            const std::string& column) {
    std::string out = what;
    if (row) out += " (row " + std::to_string(*row + 1) + ")";
    if (!column.empty()) out += " (column '" + column + "')";
    return out;
  }

  std::optional<std::size_t> row_;
  std::string column_;
};

}  // namespace zitpo
