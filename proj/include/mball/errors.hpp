#pragma once

#include <stdexcept>
#include <string>

namespace mball {

// Invalid arguments are reported with std::invalid_argument throughout; the
// types below cover numerical failure modes that callers may want to catch
// separately.

/// Gram matrix of a degree block is numerically singular.
class ConditioningError : public std::runtime_error {
 public:
  ConditioningError(int degree, double condition)
      : std::runtime_error("Gram matrix of degree block " + std::to_string(degree) +
                           " is numerically singular (condition " +
                           std::to_string(condition) + ")"),
        degree_(degree),
        condition_(condition) {}
  int degree() const noexcept { return degree_; }
  double condition() const noexcept { return condition_; }

 private:
  int degree_;
  double condition_;
};

/// Weight evaluated on the boundary sphere where it is infinite.
class BoundarySingularityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Quadrature resolution insufficient (budget doubling disagrees).
class ResolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two routes that must agree did not.
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mball
