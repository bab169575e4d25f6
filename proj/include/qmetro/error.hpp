#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace qmetro {

// Compact rendering of a real number for error messages.
inline std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

// Invalid argument or parameter outside its domain.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The truncated Fock basis cannot hold the state to the required accuracy.
class TruncationError : public std::runtime_error {
 public:
  TruncationError(const std::string& what, double deficit)
      : std::runtime_error(what), deficit_(deficit) {}
  double deficit() const noexcept { return deficit_; }

 private:
  double deficit_;
};

// A statistic that is undefined for the given input (e.g. Mandel Q at zero mean).
class UndefinedStatistic : public DomainError {
 public:
  using DomainError::DomainError;
};

// The operating point makes the estimator singular (vanishing signal slope).
class SingularOperatingPoint : public DomainError {
 public:
  using DomainError::DomainError;
};

class EmptyProjection : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qmetro
