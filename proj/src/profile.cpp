#include "ite/profile.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <sstream>

#include "ite/errors.hpp"
#include "ite/quadrature.hpp"

namespace ite {

namespace {

constexpr int kPositivityGrid = 4096;
constexpr double kBoundaryValueTol = 1e-12;
constexpr double kBoundaryDerivativeTol = 1e-6;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check_range(double r) {
  if (!(r >= 0.0 && r <= 1.0)) {
    std::ostringstream msg;
    msg << "radius " << r << " outside [0, 1]";
    throw DomainError(msg.str());
  }
}

// Second derivatives of the interpolating cubic spline with n'(0) = 0
// (radial symmetry) and n''(1) = 0 (smooth continuation by n = 1).
std::vector<double> spline_moments(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> m(n, 0.0);
  // Unknowns m[0..n-2]; m[n-1] = 0.
  const std::size_t k = n - 1;
  std::vector<double> lower(k, 0.0), diag(k, 0.0), upper(k, 0.0), rhs(k, 0.0);
  const double h0 = x[1] - x[0];
  diag[0] = 2 * h0;
  upper[0] = h0;
  rhs[0] = 6 * (y[1] - y[0]) / h0;
  for (std::size_t i = 1; i < k; ++i) {
    const double hl = x[i] - x[i - 1];
    const double hr = x[i + 1] - x[i];
    lower[i] = hl;
    diag[i] = 2 * (hl + hr);
    upper[i] = hr;
    rhs[i] = 6 * ((y[i + 1] - y[i]) / hr - (y[i] - y[i - 1]) / hl);
  }
  for (std::size_t i = 1; i < k; ++i) {
    const double w = lower[i] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  m[k - 1] = rhs[k - 1] / diag[k - 1];
  for (std::size_t i = k - 1; i-- > 0;) m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
  return m;
}

}  // namespace

RadialProfile::RadialProfile(Spec spec) : spec_(std::move(spec)) {
  if (auto* c = std::get_if<ConstantIndex>(&spec_)) {
    if (!(c->n0 > 0) || !std::isfinite(c->n0)) throw DomainError("constant profile needs n0 > 0");
    n_max_ = n_min_ = c->n0;
    return;
  }
  if (auto* b = std::get_if<SmoothBump>(&spec_)) {
    if (b->power < 3) throw DomainError("smooth_bump power must be >= 3");
    if (!std::isfinite(b->amplitude)) throw DomainError("smooth_bump amplitude must be finite");
  }
  if (auto* s = std::get_if<SplineGrid>(&spec_)) {
    if (s->r.size() != s->n.size() || s->r.size() < 2)
      throw DomainError("spline_grid needs matching r and n arrays with at least 2 knots");
    if (s->r.front() != 0.0 || s->r.back() != 1.0)
      throw DomainError("spline_grid abscissae must start at 0 and end at 1");
    for (std::size_t i = 1; i < s->r.size(); ++i)
      if (!(s->r[i] > s->r[i - 1])) throw DomainError("spline_grid abscissae must be strictly increasing");
    for (double v : s->n)
      if (!(v > 0) || !std::isfinite(v)) throw DomainError("spline_grid samples must be positive");
    spline_m_ = spline_moments(s->r, s->n);
  }

  n_max_ = -1;
  n_min_ = 1e300;
  for (int i = 0; i <= kPositivityGrid; ++i) {
    const double v = index(static_cast<double>(i) / kPositivityGrid);
    n_max_ = std::max(n_max_, v);
    n_min_ = std::min(n_min_, v);
  }
  if (!(n_min_ > 0)) throw DomainError("refractive index must stay positive on [0, 1]");

  const IndexSample edge = eval(1.0);
  if (std::abs(edge.n - 1) > kBoundaryValueTol) {
    throw DomainError("profile must satisfy n(1) = 1 (got " + fmt17(edge.n) + ")");
  }
  if (std::abs(edge.dn) > kBoundaryDerivativeTol || std::abs(edge.d2n) > kBoundaryDerivativeTol) {
    warnings_.push_back("n is not C^2-matched to the exterior at r = 1: n'(1) = " + fmt17(edge.dn) +
                        ", n''(1) = " + fmt17(edge.d2n));
  }
}

double RadialProfile::spline_value(double r, IndexSample* out) const {
  const auto& s = std::get<SplineGrid>(spec_);
  const auto& x = s.r;
  const auto& y = s.n;
  auto it = std::upper_bound(x.begin(), x.end(), r);
  std::size_t i = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
  if (i >= x.size() - 1) i = x.size() - 2;
  const double h = x[i + 1] - x[i];
  const double a = (x[i + 1] - r) / h;
  const double b = (r - x[i]) / h;
  const double m0 = spline_m_[i];
  const double m1 = spline_m_[i + 1];
  const double v = a * y[i] + b * y[i + 1] + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6;
  if (out) {
    out->n = v;
    out->dn = (y[i + 1] - y[i]) / h - (3 * a * a - 1) / 6 * h * m0 + (3 * b * b - 1) / 6 * h * m1;
    out->d2n = a * m0 + b * m1;
  }
  return v;
}

double RadialProfile::index(double r) const {
  switch (spec_.index()) {
    case 0:
      return std::get<ConstantIndex>(spec_).n0;
    case 1: {
      const auto& b = std::get<SmoothBump>(spec_);
      const double u = 1 - r * r;
      double up = 1;
      for (int j = 0; j < b.power; ++j) up *= u;
      return 1 + b.amplitude * up;
    }
    default:
      return spline_value(r, nullptr);
  }
}

IndexSample RadialProfile::eval(double r) const {
  check_range(r);
  IndexSample s;
  switch (spec_.index()) {
    case 0:
      s.n = std::get<ConstantIndex>(spec_).n0;
      break;
    case 1: {
      const auto& b = std::get<SmoothBump>(spec_);
      const int m = b.power;
      const double u = 1 - r * r;
      double um2 = 1;  // u^(m-2)
      for (int j = 0; j < m - 2; ++j) um2 *= u;
      const double um1 = um2 * u;
      s.n = 1 + b.amplitude * um1 * u;
      s.dn = -2 * r * b.amplitude * m * um1;
      s.d2n = b.amplitude * m * (4 * r * r * (m - 1) * um2 - 2 * um1);
      break;
    }
    default:
      spline_value(r, &s);
      break;
  }
  return s;
}

std::string RadialProfile::canonical() const {
  std::ostringstream out;
  switch (spec_.index()) {
    case 0:
      out << "constant(n0=" << fmt17(std::get<ConstantIndex>(spec_).n0) << ")";
      break;
    case 1: {
      const auto& b = std::get<SmoothBump>(spec_);
      out << "smooth_bump(amplitude=" << fmt17(b.amplitude) << ",power=" << b.power << ")";
      break;
    }
    default: {
      const auto& s = std::get<SplineGrid>(spec_);
      out << "spline_grid(r=[";
      for (std::size_t i = 0; i < s.r.size(); ++i) out << (i ? "," : "") << fmt17(s.r[i]);
      out << "],n=[";
      for (std::size_t i = 0; i < s.n.size(); ++i) out << (i ? "," : "") << fmt17(s.n[i]);
      out << "])";
    }
  }
  return out.str();
}

double potential(const RadialProfile& profile, double r) {
  const IndexSample s = profile.eval(r);
  return s.d2n / (4 * s.n * s.n) - 5.0 / 16.0 * s.dn * s.dn / (s.n * s.n * s.n);
}

LiouvilleMap::LiouvilleMap(RadialProfile profile, double quad_tol)
    : profile_(std::move(profile)), quad_tol_(quad_tol) {
  if (!(quad_tol_ > 0)) throw DomainError("quadrature tolerance must be positive");
  b_ = travel_time(1.0);
}

double LiouvilleMap::travel_time(double r) const {
  check_range(r);
  auto f = [this](double rho) { return std::sqrt(profile_.index(rho)); };
  return quad::integrate_adaptive<double>(f, 0.0, r, quad_tol_).value;
}

double LiouvilleMap::potential_moment(double r) const {
  check_range(r);
  auto f = [this](double rho) { return potential(profile_, rho) * std::sqrt(profile_.index(rho)); };
  return quad::integrate_adaptive<double>(f, 0.0, r, quad_tol_).value;
}

std::string fingerprint(const RadialProfile& profile) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : profile.canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ite
