#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nplda {

/// Invalid argument or precondition violation (bad alpha, empty class, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Matrix is singular or too ill-conditioned for the requested solve.
class SingularityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative routine failed to converge.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, double residual = 0.0)
      : std::runtime_error(what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// The data cannot support the requested procedure: too few left-out class-0
/// points for the umbrella order, LDA with d >= n-2, or a parametric bound
/// whose denominator is not positive.
class FeasibilityError : public std::runtime_error {
 public:
  explicit FeasibilityError(const std::string& what, std::size_t required = 0,
                            std::size_t available = 0)
      : std::runtime_error(what), required_(required), available_(available) {}

  std::size_t required() const noexcept { return required_; }
  std::size_t available() const noexcept { return available_; }

 private:
  std::size_t required_;
  std::size_t available_;
};

}  // namespace nplda
