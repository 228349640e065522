#pragma once

#include <string>
#include <variant>
#include <vector>

namespace ite {

/// n(r) with its first two radial derivatives.
struct IndexSample {
  double n = 1;
  double dn = 0;
  double d2n = 0;
};

/// Homogeneous medium n(r) = n0.
struct ConstantIndex {
  double n0 = 1;
};

/// n(r) = 1 + amplitude * (1 - r^2)^power, power >= 3 so n is C^2 across r = 1.
struct SmoothBump {
  double amplitude = 3;
  int power = 3;
};

/// Cubic spline through (r_i, n_i), r_0 = 0 < ... < r_M = 1, with n'(0) = 0 and
/// n''(1) = 0 as end conditions.
struct SplineGrid {
  std::vector<double> r;
  std::vector<double> n;
};

/// Radially symmetric refractive index on [0, 1].
///
/// Construction validates positivity on a dense grid and, for the bump and
/// spline variants, that n(1) = 1. Boundary derivative mismatch only
/// produces a warning since sampled data rarely matches it exactly.
class RadialProfile {
public:
  using Spec = std::variant<ConstantIndex, SmoothBump, SplineGrid>;

  explicit RadialProfile(Spec spec);

  static RadialProfile constant(double n0) { return RadialProfile(ConstantIndex{n0}); }
  static RadialProfile smooth_bump(double amplitude, int power) {
    return RadialProfile(SmoothBump{amplitude, power});
  }
  static RadialProfile spline(std::vector<double> r, std::vector<double> n) {
    return RadialProfile(SplineGrid{std::move(r), std::move(n)});
  }

  /// (n, n', n'') at r; throws DomainError outside [0, 1].
  IndexSample eval(double r) const;
  /// n(r) only, without range checks; used in the integrator inner loop.
  double index(double r) const;

  const Spec& spec() const { return spec_; }
  bool is_constant() const { return std::holds_alternative<ConstantIndex>(spec_); }
  double max_index() const { return n_max_; }
  double min_index() const { return n_min_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  /// Canonical one-line description, stable across runs; used for fingerprints.
  std::string canonical() const;

private:
  double spline_value(double r, IndexSample* out) const;

  Spec spec_;
  std::vector<double> spline_m_;  // second derivatives at the spline knots
  double n_max_ = 1;
  double n_min_ = 1;
  std::vector<std::string> warnings_;
};

/// Liouville potential p = n''/(4 n^2) - (5/16) n'^2 / n^3 evaluated at xi(r).
double potential(const RadialProfile& profile, double r);

/// 16 hex digits of the FNV-1a hash of the canonical description.
std::string fingerprint(const RadialProfile& profile);

/// Travel-time map xi(r) = int_0^r sqrt(n) together with the integrated
/// potential Q. All xi-space quantities are computed by r-space quadrature.
class LiouvilleMap {
public:
  explicit LiouvilleMap(RadialProfile profile, double quad_tol = 1e-12);

  const RadialProfile& profile() const { return profile_; }
  double quad_tol() const { return quad_tol_; }

  /// B = xi(1).
  double total_travel_time() const { return b_; }
  double travel_time(double r) const;
  /// Q(xi(r)) = int_0^r p(rho) sqrt(n(rho)) d rho.
  double potential_moment(double r) const;

private:
  RadialProfile profile_;
  double quad_tol_;
  double b_ = 0;
};

}  // namespace ite
