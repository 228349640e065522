#pragma once

#include <stdexcept>
#include <string>

namespace ite {

/// Argument outside the domain an operation is defined on.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Iterative procedure (quadrature, ODE, Newton, eigen) failed to converge.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Integrator ran out of steps before reaching the requested radius.
class StepLimitError : public NumericalError {
public:
  StepLimitError(const std::string& what, double reached_radius)
      : NumericalError(what), reached_radius_(reached_radius) {}
  double reached_radius() const noexcept { return reached_radius_; }

private:
  double reached_radius_;
};

/// Adaptive quadrature stopped above its accuracy target.
class QuadratureError : public NumericalError {
public:
  QuadratureError(const std::string& what, double achieved_error)
      : NumericalError(what), achieved_error_(achieved_error) {}
  double achieved_error() const noexcept { return achieved_error_; }

private:
  double achieved_error_;
};

/// A zero of D0 sits on a contour and jittering did not move it off.
class BoundaryCollisionError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// D0 vanishes identically, which happens exactly for n == 1.
class DegenerateDeterminantError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Matching matrix at k has no numerical null vector.
class NotAnEigenvalueError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Gram system too ill-conditioned to solve at the requested truncation.
class ConditioningError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// Malformed or inconsistent configuration document.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace ite
