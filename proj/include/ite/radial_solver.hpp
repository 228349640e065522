#pragma once

#include <complex>
#include <optional>

#include "ite/profile.hpp"
#include "ite/scaled_complex.hpp"

namespace ite {

using cplx = std::complex<double>;

struct IntegratorConfig {
  double rel_tol = 1e-12;
  double abs_tol = 1e-15;
  int max_steps = 200000;
  /// log-magnitude at which the state is rescaled into the mantissa range.
  double renorm_threshold = 30;

  /// Throws DomainError when rel_tol < 1e-14, max_steps < 1000 or a value is non-positive.
  void validate() const;
};

/// y and y' of y'' + k^2 n(r) y = 0, y(0) = 0, y'(0) = 1, at radius r.
///
/// All ScaledComplex fields of one sample share the same exponent.
struct SolutionSample {
  ScaledComplex y;
  ScaledComplex dy;
  std::optional<ScaledComplex> dk_y;
  std::optional<ScaledComplex> dk_dy;
  double r = 0;
  cplx k{0};
  int steps = 0;
};

/// Adaptive embedded 7(8) Runge-Kutta integration of the radial equation.
SolutionSample integrate(const RadialProfile& profile, cplx k, double r_end,
                         const IntegratorConfig& cfg = {});

/// As integrate(), also solving (d_k y)'' + k^2 n d_k y = -2 k n y alongside.
SolutionSample integrate_with_k_derivative(const RadialProfile& profile, cplx k, double r_end,
                                           const IntegratorConfig& cfg = {});

/// Value and xi-derivative of the Liouville-transformed solution z.
struct ZPair {
  ScaledComplex z;
  ScaledComplex dz;
};

/// Maps an r-space sample to z = n^{1/4} y and dz/dxi at the same point.
ZPair to_liouville(const RadialProfile& profile, const SolutionSample& sample);

/// Truncated large-k expansion of the solution of z'' + (k^2 - p) z = 0 with
/// z(0) = 0, z'(0) = 1, evaluated at xi(r).
///
/// order 0 keeps the leading sin/cos terms, order 1 adds the Q(xi) terms and
/// order 2 the 1/k^3 (resp. 1/k^2) brackets. The solution produced by
/// integrate() maps to this normalisation after multiplying by n(0)^{1/4}.
ZPair asymptotic_z(const LiouvilleMap& map, double r, cplx k, int order, double k_floor = 1.0);

}  // namespace ite
