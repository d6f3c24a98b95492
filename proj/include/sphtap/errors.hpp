#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace sphtap {

// Malformed or out-of-range arguments: wrong dimensions, negative
// temperatures, a constraint matrix without unit diagonal, ...
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A mathematically undefined evaluation: log of a non-positive eigenvalue,
// an entropy term outside the Loewner interval, a Stieltjes transform inside
// the support. Carries the sentinel value the quantity takes in the limit
// (usually -inf) so callers that scan a region can keep going.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what,
                       double value = -std::numeric_limits<double>::infinity())
      : std::domain_error(what), value_(value) {}
  double value() const noexcept { return value_; }

 private:
  double value_;
};

// An iterative method ran out of budget. best() is the best objective value
// seen before giving up.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what,
                          double best = std::numeric_limits<double>::quiet_NaN())
      : std::runtime_error(what), best_(best) {}
  double best() const noexcept { return best_; }

 private:
  double best_;
};

}  // namespace sphtap
