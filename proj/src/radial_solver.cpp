#include "ite/radial_solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "ite/errors.hpp"

namespace ite {

namespace {

// Fehlberg 7(8) tableau; propagation uses the eighth-order weights.
constexpr int kStages = 13;
constexpr std::array<double, kStages> kC = {0,       2. / 27, 1. / 9, 1. / 6, 5. / 12, 1. / 2, 5. / 6,
                                           1. / 6, 2. / 3,  1. / 3, 1,      0,       1};
constexpr double kA[kStages][kStages - 1] = {
    {},
    {2. / 27},
    {1. / 36, 1. / 12},
    {1. / 24, 0, 1. / 8},
    {5. / 12, 0, -25. / 16, 25. / 16},
    {1. / 20, 0, 0, 1. / 4, 1. / 5},
    {-25. / 108, 0, 0, 125. / 108, -65. / 27, 125. / 54},
    {31. / 300, 0, 0, 0, 61. / 225, -2. / 9, 13. / 900},
    {2, 0, 0, -53. / 6, 704. / 45, -107. / 9, 67. / 90, 3},
    {-91. / 108, 0, 0, 23. / 108, -976. / 135, 311. / 54, -19. / 60, 17. / 6, -1. / 12},
    {2383. / 4100, 0, 0, -341. / 164, 4496. / 1025, -301. / 82, 2133. / 4100, 45. / 82, 45. / 164,
     18. / 41},
    {3. / 205, 0, 0, 0, 0, -6. / 41, -3. / 205, -3. / 41, 3. / 41, 6. / 41, 0},
    {-1777. / 4100, 0, 0, -341. / 164, 4496. / 1025, -289. / 82, 2193. / 4100, 51. / 82, 33. / 164,
     12. / 41, 0, 1},
};
constexpr std::array<double, kStages> kB = {0,           0,           0,          0,         0,
                                            34. / 105,   9. / 35,     9. / 35,    9. / 280,  9. / 280,
                                            0,           41. / 840,   41. / 840};
constexpr double kErrWeight = 41. / 840;  // err = w (k0 + k10 - k11 - k12) h

template <int N>
using State = std::array<cplx, N>;

// State layout: y, y', and optionally d_k y, d_k y'.
template <int N>
struct RadialRhs {
  const RadialProfile& profile;
  cplx k;
  cplx k2;

  State<N> operator()(double r, const State<N>& s) const {
    const double n = profile.index(r);
    State<N> d;
    d[0] = s[1];
    d[1] = -k2 * n * s[0];
    if constexpr (N == 4) {
      d[2] = s[3];
      d[3] = -k2 * n * s[2] - 2.0 * k * n * s[0];
    }
    return d;
  }
};

template <int N>
double group_norm(const State<N>& s, int first, double kappa) {
  return std::max(kappa * std::abs(s[first]), std::abs(s[first + 1]));
}

template <int N>
SolutionSample run(const RadialProfile& profile, cplx k, double r_end, const IntegratorConfig& cfg) {
  cfg.validate();
  if (!(r_end > 0.0 && r_end <= 1.0)) {
    std::ostringstream msg;
    msg << "integrate: r_end = " << r_end << " outside (0, 1]";
    throw DomainError(msg.str());
  }
  if (!std::isfinite(k.real()) || !std::isfinite(k.imag())) throw DomainError("integrate: k must be finite");

  SolutionSample out;
  out.r = r_end;
  out.k = k;
  if (k == cplx(0)) {
    // y'' = 0 exactly; y is even in k so its k-derivative vanishes.
    out.y = ScaledComplex(r_end);
    out.dy = ScaledComplex(1.0);
    if constexpr (N == 4) {
      out.dk_y = ScaledComplex();
      out.dk_dy = ScaledComplex();
    }
    return out;
  }

  const RadialRhs<N> rhs{profile, k, k * k};
  const double kappa = std::max(1.0, std::abs(k) * std::sqrt(profile.max_index()));
  const double h_max = std::min(0.25, 2.0 / (1.0 + std::abs(k)));

  State<N> s{};
  s[1] = 1.0;
  double exponent = 0;
  double r = 0;
  double h = std::min(h_max, 0.05);
  std::array<State<N>, kStages> stage;
  int steps = 0;
  int attempts = 0;

  while (r < r_end) {
    if (attempts++ >= cfg.max_steps) {
      std::ostringstream msg;
      msg << "integrate: step budget " << cfg.max_steps << " exhausted at r = " << r << " for k = " << k;
      throw StepLimitError(msg.str(), r);
    }
    bool last = false;
    if (r + h >= r_end) {
      h = r_end - r;
      last = true;
    }

    for (int i = 0; i < kStages; ++i) {
      State<N> arg = s;
      for (int j = 0; j < i; ++j) {
        const double a = kA[i][j];
        if (a == 0) continue;
        for (int c = 0; c < N; ++c) arg[c] += (h * a) * stage[j][c];
      }
      stage[i] = rhs(r + kC[i] * h, arg);
    }
    State<N> next = s;
    State<N> err{};
    for (int c = 0; c < N; ++c) {
      cplx acc = 0;
      for (int i = 0; i < kStages; ++i)
        if (kB[i] != 0) acc += kB[i] * stage[i][c];
      next[c] += h * acc;
      err[c] = (h * kErrWeight) * (stage[0][c] + stage[10][c] - stage[11][c] - stage[12][c]);
    }

    const double scale_a = std::max(group_norm<N>(s, 0, kappa), group_norm<N>(next, 0, kappa));
    double ratio = group_norm<N>(err, 0, kappa) / std::max(cfg.abs_tol, cfg.rel_tol * scale_a);
    if constexpr (N == 4) {
      const double scale_b =
          std::max({group_norm<N>(s, 2, kappa), group_norm<N>(next, 2, kappa), scale_a});
      ratio = std::max(ratio, group_norm<N>(err, 2, kappa) / std::max(cfg.abs_tol, cfg.rel_tol * scale_b));
    }
    if (!std::isfinite(ratio)) {
      throw NumericalError("integrate: non-finite state (internal invariant violated)");
    }

    const double factor = ratio == 0 ? 5.0 : std::clamp(0.9 * std::pow(ratio, -1.0 / 8.0), 0.2, 5.0);
    if (ratio <= 1.0) {
      r = last ? r_end : r + h;
      s = next;
      ++steps;
      double peak = 0;
      for (const cplx& v : s) peak = std::max(peak, std::abs(v));
      peak = std::max(peak, kappa * std::abs(s[0]));
      const double lp = std::log(peak);
      if (lp > cfg.renorm_threshold) {
        const double shift = std::floor(lp);
        const double f = std::exp(-shift);
        for (cplx& v : s) v *= f;
        exponent += shift;
      }
      if (last) break;
      h = std::min(h * factor, h_max);
    } else {
      h *= factor;
    }
  }

  out.steps = steps;
  out.y = ScaledComplex(s[0], exponent);
  out.dy = ScaledComplex(s[1], exponent);
  if constexpr (N == 4) {
    out.dk_y = ScaledComplex(s[2], exponent);
    out.dk_dy = ScaledComplex(s[3], exponent);
  }
  return out;
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(rel_tol >= 1e-14)) throw DomainError("integrator rel_tol must be >= 1e-14");
  if (!(abs_tol > 0)) throw DomainError("integrator abs_tol must be positive");
  if (max_steps < 1000) throw DomainError("integrator max_steps must be >= 1000");
  if (!(renorm_threshold > 0)) throw DomainError("integrator renorm_threshold must be positive");
}

SolutionSample integrate(const RadialProfile& profile, cplx k, double r_end, const IntegratorConfig& cfg) {
  return run<2>(profile, k, r_end, cfg);
}

SolutionSample integrate_with_k_derivative(const RadialProfile& profile, cplx k, double r_end,
                                           const IntegratorConfig& cfg) {
  return run<4>(profile, k, r_end, cfg);
}

ZPair to_liouville(const RadialProfile& profile, const SolutionSample& sample) {
  const IndexSample ix = profile.eval(sample.r);
  const double q = std::pow(ix.n, 0.25);
  ZPair z;
  z.z = sample.y * ScaledComplex(q);
  // dz/dxi = (dz/dr) / sqrt(n), dz/dr = n^{1/4} y' + (1/4) n^{-3/4} n' y.
  z.dz = (sample.dy * ScaledComplex(q) + sample.y * ScaledComplex(0.25 * ix.dn / (q * q * q))) *
         ScaledComplex(1.0 / std::sqrt(ix.n));
  return z;
}

ZPair asymptotic_z(const LiouvilleMap& map, double r, cplx k, int order, double k_floor) {
  if (std::abs(k) < k_floor) {
    std::ostringstream msg;
    msg << "asymptotic_z: |k| = " << std::abs(k) << " below floor " << k_floor;
    throw DomainError(msg.str());
  }
  if (order < 0 || order > 2) throw DomainError("asymptotic_z: order must be 0, 1 or 2");
  const double xi = map.travel_time(r);
  const ScaledComplex s = scaled_sin(k * xi);
  const ScaledComplex c = scaled_cos(k * xi);
  const ScaledComplex kk(k);
  ZPair out;
  out.z = s / kk;
  out.dz = c;
  if (order >= 1) {
    const double q = map.potential_moment(r);
    out.z -= c * ScaledComplex(q / 2.0) / (kk * kk);
    out.dz += s * ScaledComplex(q / 2.0) / kk;
    if (order == 2) {
      const double p = potential(map.profile(), r);
      const double p0 = potential(map.profile(), 0.0);
      out.z += s * ScaledComplex((p + p0 - 0.5 * q * q) / 4.0) / (kk * kk * kk);
      out.dz += c * ScaledComplex((p - p0 - 0.5 * q * q) / 4.0) / (kk * kk);
    }
  }
  return out;
}

}  // namespace ite
