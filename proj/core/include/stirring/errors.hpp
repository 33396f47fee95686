#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stirring {

/// Point evaluated outside the closed flow domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A marker left the domain during time stepping. Usually means the step is
/// too large for the velocity magnitude or the field is not tangent.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(std::size_t step, std::size_t marker, double excess);

  std::size_t step() const noexcept { return step_; }
  std::size_t marker() const noexcept { return marker_; }
  double excess() const noexcept { return excess_; }

 private:
  std::size_t step_;
  std::size_t marker_;
  double excess_;
};

/// Inconsistent array shapes or time grids between collaborating objects.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Transport solver could not satisfy its stability constraint.
class CflError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace stirring
