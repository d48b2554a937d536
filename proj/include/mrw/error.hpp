#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mrw {

// Parameter or argument outside the valid domain of an operation.
class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A covariance sequence or matrix that failed a positive-definiteness check.
class not_psd_error : public std::runtime_error {
 public:
  not_psd_error(const std::string& what, std::size_t order, double value)
      : std::runtime_error(what), order_(order), value_(value) {}

  // Order (or row) at which the factorization broke down.
  std::size_t order() const noexcept { return order_; }
  // Offending innovation variance, pivot or smallest eigenvalue.
  double value() const noexcept { return value_; }

 private:
  std::size_t order_;
  double value_;
};

// Malformed or unusable input data. `line` is 1-based, 0 when not tied to a line.
class data_error : public std::runtime_error {
 public:
  explicit data_error(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace mrw
