#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <queue>
#include <sstream>
#include <vector>

#include "ite/errors.hpp"

namespace ite::quad {

template <typename T>
struct QuadratureResult {
  T value{};
  double error_estimate = 0;
  int evaluations = 0;
};

namespace detail {

// 15-point Kronrod abscissae on [-1,1]; odd indices are the 7-point Gauss nodes.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename T>
double magnitude(const T& v) {
  return std::abs(v);
}

template <typename T>
struct Segment {
  double a, b;
  T value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <typename T, typename F>
Segment<T> gauss_kronrod_15(const F& f, double a, double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const T fc = f(centre);
  T kronrod = fc * kWgk[7];
  T gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const T f1 = f(centre - dx);
    const T f2 = f(centre + dx);
    kronrod += (f1 + f2) * kWgk[j];
    if (j % 2 == 1) gauss += (f1 + f2) * kWg[j / 2];
  }
  return {a, b, kronrod * half, magnitude<T>((kronrod - gauss) * half)};
}

}  // namespace detail

/// Globally adaptive 7/15-point Gauss-Kronrod quadrature.
///
/// Bisects the segment with the largest error estimate until the summed
/// estimate drops below `abs_tol`. Throws QuadratureError (carrying the
/// achieved estimate) when `max_segments` is exhausted first.
template <typename T, typename F>
QuadratureResult<T> integrate_adaptive(const F& f, double a, double b, double abs_tol,
                                       int max_segments = 2000) {
  QuadratureResult<T> out;
  if (a == b) return out;
  std::priority_queue<detail::Segment<T>> heap;
  heap.push(detail::gauss_kronrod_15<T>(f, a, b));
  out.evaluations = 15;
  T total = heap.top().value;
  double err = heap.top().error;
  int bisections = 0;
  while (err > abs_tol) {
    if (static_cast<int>(heap.size()) >= max_segments) {
      std::ostringstream msg;
      msg << "adaptive quadrature on [" << a << ", " << b << "] stopped at error " << err
          << " > " << abs_tol;
      throw QuadratureError(msg.str(), err);
    }
    const detail::Segment<T> worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    auto left = detail::gauss_kronrod_15<T>(f, worst.a, mid);
    auto right = detail::gauss_kronrod_15<T>(f, mid, worst.b);
    out.evaluations += 30;
    ++bisections;
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    // Recompute from scratch now and then so cancellation in the running
    // sums cannot stall the loop.
    if (bisections % 100 == 0 || err <= abs_tol) {
      auto copy = heap;
      total = T{};
      err = 0;
      while (!copy.empty()) {
        total += copy.top().value;
        err += copy.top().error;
        copy.pop();
      }
    }
  }
  out.value = total;
  out.error_estimate = err;
  return out;
}

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussRule gauss_legendre(int order) {
  if (order < 1) throw DomainError("gauss_legendre: order must be positive");
  GaussRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const double pi = std::acos(-1.0);
  auto legendre = [order](double x, double& p, double& dp) {
    double p0 = 1, p1 = x;
    for (int n = 2; n <= order; ++n) {
      const double p2 = ((2 * n - 1) * x * p1 - (n - 1) * p0) / n;
      p0 = p1;
      p1 = p2;
    }
    p = p1;
    dp = order * (x * p1 - p0) / (x * x - 1);
  };
  for (int i = 0; i < (order + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (order + 0.5));
    double p = 0, dp = 0;
    for (int it = 0; it < 100; ++it) {
      legendre(x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre(x, p, dp);
    const double w = 2 / ((1 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[order - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[order - 1 - i] = w;
  }
  return rule;
}

}  // namespace ite::quad
