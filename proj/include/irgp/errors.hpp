#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace irgp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters, unknown names, dimension mismatches.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Cholesky breakdown or other loss of positive definiteness.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Non-finite observation handed to a posterior update.
class ObservationError : public Error {
 public:
  using Error::Error;
};

// Point outside the domain of an analytic benchmark.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Tabular file contains missing values.
class IngestionError : public Error {
 public:
  using Error::Error;
};

// Tabular cell that is not a number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t column)
      : Error(what), row_(row), column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

}  // namespace irgp
