#pragma once

// Independent reference computations used by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
constexpr double pi = 3.14159265358979323846;

// D0 for a constant index n0: sin k cos(s k)/k - cos k sin(s k)/(s k), s = sqrt(n0).
inline cplx d0_constant(double n0, cplx k) {
  const double s = std::sqrt(n0);
  return std::sin(k) * std::cos(s * k) / k - std::cos(k) * std::sin(s * k) / (s * k);
}

// d/dk of d0_constant(4, k) = g/k with g = sin k cos 2k - cos k sin 2k / 2.
inline cplx d0_constant4_derivative(cplx k) {
  const cplx g = std::sin(k) * std::cos(2.0 * k) - std::cos(k) * std::sin(2.0 * k) / 2.0;
  const cplx dg = -1.5 * std::sin(k) * std::sin(2.0 * k);
  return dg / k - g / (k * k);
}

// Bump n = 1 + a (1 - r^2)^m and its derivatives.
struct Bump {
  double a = 3;
  int m = 3;
  double n(double r) const { return 1 + a * std::pow(1 - r * r, m); }
  double dn(double r) const { return -2.0 * a * m * r * std::pow(1 - r * r, m - 1); }
  double d2n(double r) const {
    const double u = 1 - r * r;
    return -2.0 * a * m * std::pow(u, m - 1) + 4.0 * a * m * (m - 1) * r * r * std::pow(u, m - 2);
  }
  double p(double r) const {
    const double nn = n(r), d = dn(r);
    return d2n(r) / (4 * nn * nn) - 5 * d * d / (16 * nn * nn * nn);
  }
};

// Composite Gauss-Legendre with hard-coded 10-point nodes.
inline double composite_gl10(const std::function<double(double)>& f, double a, double b, int panels) {
  static const double x[5] = {0.1488743389816312, 0.4333953941292472, 0.6794095682990244, 0.8650633666889845,
                              0.9739065285171717};
  static const double w[5] = {0.2955242247147529, 0.2692667193099963, 0.2190863625159820, 0.1494513491505806,
                              0.0666713443086881};
  const double h = (b - a) / panels;
  double sum = 0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (int i = 0; i < 5; ++i) {
      sum += w[i] * (f(mid - 0.5 * h * x[i]) + f(mid + 0.5 * h * x[i]));
    }
  }
  return 0.5 * h * sum;
}

// Muller's method on f from three starting points; nullopt when it stalls.
inline std::optional<cplx> muller(const std::function<cplx(cplx)>& f, cplx x0, cplx x1, cplx x2, double tol,
                                  int max_iter = 100) {
  cplx f0 = f(x0), f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < max_iter; ++it) {
    const cplx h1 = x1 - x0, h2 = x2 - x1;
    const cplx d1 = (f1 - f0) / h1, d2 = (f2 - f1) / h2;
    const cplx a = (d2 - d1) / (h2 + h1);
    const cplx b = a * h2 + d2;
    const cplx disc = std::sqrt(b * b - 4.0 * a * f2);
    const cplx den = std::abs(b + disc) > std::abs(b - disc) ? b + disc : b - disc;
    if (den == cplx(0)) return std::nullopt;
    const cplx dx = -2.0 * f2 / den;
    x0 = x1;
    f0 = f1;
    x1 = x2;
    f1 = f2;
    x2 = x2 + dx;
    f2 = f(x2);
    if (!std::isfinite(x2.real()) || !std::isfinite(x2.imag())) return std::nullopt;
    if (std::abs(dx) <= tol * std::max(1.0, std::abs(x2)) || f2 == cplx(0)) return x2;
  }
  return std::nullopt;
}

// Local minima of |f| on a uniform grid over the rectangle, each polished by
// Muller's method and kept when it stays inside the rectangle. Roots closer
// than `merge` are reported once.
inline std::vector<cplx> grid_scan_zeros(const std::function<cplx(cplx)>& f,
                                         const std::function<double(cplx, cplx)>& normalized, double re_min,
                                         double re_max, double im_min, double im_max, int nx, int ny,
                                         double accept, double merge) {
  std::vector<double> mag(static_cast<std::size_t>(nx) * ny);
  auto at = [&](int i, int j) {
    return cplx(re_min + (re_max - re_min) * i / (nx - 1), im_min + (im_max - im_min) * j / (ny - 1));
  };
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) mag[i * ny + j] = std::abs(f(at(i, j))) / normalized(at(i, j), 1.0);
  std::vector<cplx> roots;
  const double hx = (re_max - re_min) / (nx - 1), hy = (im_max - im_min) / (ny - 1);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const double v = mag[i * ny + j];
      bool minimum = true;
      for (int di = -1; di <= 1 && minimum; ++di)
        for (int dj = -1; dj <= 1 && minimum; ++dj) {
          if (di == 0 && dj == 0) continue;
          const int a = i + di, b = j + dj;
          if (a < 0 || b < 0 || a >= nx || b >= ny) continue;
          if (mag[a * ny + b] < v) minimum = false;
        }
      if (!minimum) continue;
      const cplx c = at(i, j);
      auto r = muller(f, c - cplx(hx, 0), c + cplx(0, hy), c, 1e-14);
      if (!r) continue;
      if (r->real() < re_min || r->real() > re_max || r->imag() < im_min || r->imag() > im_max) continue;
      if (std::abs(f(*r)) / normalized(*r, 1.0) > accept) continue;
      const bool seen = std::any_of(roots.begin(), roots.end(), [&](cplx q) { return std::abs(q - *r) < merge; });
      if (!seen) roots.push_back(*r);
    }
  }
  return roots;
}

}  // namespace oracle
