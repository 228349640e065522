#include "ite/determinant.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "ite/errors.hpp"

namespace ite {

namespace {

constexpr double kPi = 3.14159265358979323846;

ScaledComplex sinc(cplx k) {
  if (k == cplx(0)) return ScaledComplex(1.0);
  return scaled_sin(k) / ScaledComplex(k);
}

// d/dk (sin k / k)
ScaledComplex sinc_derivative(cplx k) {
  if (std::abs(k) < 1e-3) {
    const cplx k2 = k * k;
    return ScaledComplex(-k / 3.0 + k * k2 / 30.0);
  }
  const ScaledComplex kk(k);
  return (scaled_cos(k) * kk - scaled_sin(k)) / (kk * kk);
}

ScaledComplex assemble(const SolutionSample& s, cplx k) {
  return sinc(k) * s.dy - scaled_cos(k) * s.y;
}

}  // namespace

ScaledComplex d0(const RadialProfile& profile, cplx k, const IntegratorConfig& cfg) {
  return assemble(integrate(profile, k, 1.0, cfg), k);
}

D0Pair d0_with_derivative(const RadialProfile& profile, cplx k, const IntegratorConfig& cfg) {
  const SolutionSample s = integrate_with_k_derivative(profile, k, 1.0, cfg);
  D0Pair out;
  out.value = assemble(s, k);
  out.derivative = sinc_derivative(k) * s.dy + sinc(k) * *s.dk_dy + scaled_sin(k) * s.y -
                   scaled_cos(k) * *s.dk_y;
  return out;
}

ScaledComplex d0_derivative(const RadialProfile& profile, cplx k, const IntegratorConfig& cfg) {
  return d0_with_derivative(profile, k, cfg).derivative;
}

double log_envelope(cplx k, double travel_time) {
  return (1 + travel_time) * std::abs(k.imag()) - std::log(std::max(1.0, std::abs(k)));
}

double normalized_abs(const ScaledComplex& value, cplx k, double travel_time) {
  if (value.is_zero()) return 0;
  return std::exp(value.log_abs() - log_envelope(k, travel_time));
}

double prescan_max_normalized(const LiouvilleMap& map, double re_min, double re_max, double im_min,
                              double im_max, const IntegratorConfig& cfg, int nx, int ny) {
  // The degeneracy floor sits below the default solver noise, so the prescan runs at the tightest tolerance.
  IntegratorConfig tight = cfg;
  tight.rel_tol = 1e-14;
  tight.abs_tol = std::min(cfg.abs_tol, 1e-18);
  double peak = 0;
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      // Interior points with irrational-looking offsets, away from the real axis.
      const double fx = (i + 0.5 + 0.1234 * ((i + j) % 3 - 1)) / nx;
      const double fy = (j + 0.5 + 0.0871) / ny;
      const cplx k(re_min + fx * (re_max - re_min), im_min + fy * (im_max - im_min));
      if (std::abs(k) < 0.1) continue;
      peak = std::max(peak, normalized_abs(d0(map.profile(), k, tight), k, map.total_travel_time()));
    }
  }
  return peak;
}

void require_nondegenerate(const LiouvilleMap& map, double re_min, double re_max, double im_min,
                           double im_max, const IntegratorConfig& cfg, double floor) {
  const double peak = prescan_max_normalized(map, re_min, re_max, im_min, im_max, cfg);
  if (peak < floor) {
    std::ostringstream msg;
    msg << "identically-zero determinant: max normalized |D0| = " << peak
        << " on the prescan grid (the index is n == 1)";
    throw DegenerateDeterminantError(msg.str());
  }
}

AsymptoticModel AsymptoticModel::from_map(const LiouvilleMap& map, Mode mode) {
  AsymptoticModel m;
  m.travel_time = map.total_travel_time();
  m.n0_quarter = std::pow(map.profile().eval(0.0).n, 0.25);
  m.p0 = potential(map.profile(), 0.0);
  m.p_b = potential(map.profile(), 1.0);
  m.q_b = map.potential_moment(1.0);
  m.mode = mode;
  return m;
}

void AsymptoticModel::validate() const {
  if (!(travel_time > 0) || !(n0_quarter > 0) || !std::isfinite(travel_time) || !std::isfinite(n0_quarter) ||
      !std::isfinite(p0) || !std::isfinite(q_b) || !std::isfinite(p_b)) {
    throw DomainError("asymptotic model needs B > 0, n(0)^{1/4} > 0 and finite coefficients");
  }
}

ScaledComplex d0_asymptotic(const AsymptoticModel& model, cplx k, double guard) {
  model.validate();
  if (std::abs(k) < 1.0) throw DomainError("d0_asymptotic: |k| must be at least 1");
  const double b = model.travel_time;
  const ScaledComplex kk(k);

  if (model.mode == AsymptoticModel::Mode::reduced) {
    const ScaledComplex minus = scaled_sin((1 - b) * k);
    const ScaledComplex plus = scaled_sin((1 + b) * k);
    // (e^{iz} - e^{-iz}) = 2i sin z, and the 2i cancels against i k^3 up to a factor 2.
    return ScaledComplex(2.0) * (kk * kk * minus - ScaledComplex(model.p0) * plus) / (kk * kk * kk);
  }

  const ScaledComplex s = scaled_sin(k * b);
  const ScaledComplex c = scaled_cos(k * b);
  // Compare against the larger of the two so the guard is scale free off the axis.
  const double big = std::max(s.log_abs(), c.log_abs());
  if (std::exp(s.log_abs() - big) < guard) {
    std::ostringstream msg;
    msg << "d0_asymptotic: k = " << k << " too close to a pole of cot(kB) (|sin kB| small)";
    throw DomainError(msg.str());
  }
  if (std::exp(c.log_abs() - big) < guard) {
    std::ostringstream msg;
    msg << "d0_asymptotic: k = " << k << " too close to a pole of tan(kB) (|cos kB| small)";
    throw DomainError(msg.str());
  }
  const cplx cot = (c / s).value();
  const cplx tan = (s / c).value();
  const double q = model.q_b;
  const cplx o1 = 1.0 - cot * q / (2.0 * k) + (model.p_b + model.p0 - 0.5 * q * q) / (4.0 * k * k);
  const cplx o2 = 1.0 + tan * q / (2.0 * k) + (model.p_b - model.p0 - 0.5 * q * q) / (4.0 * k * k);
  const ScaledComplex plus = scaled_sin((1 + b) * k) * ScaledComplex(o2 - o1);
  const ScaledComplex minus = scaled_sin((1 - b) * k) * ScaledComplex(o2 + o1);
  return (plus + minus) / (ScaledComplex(2.0 * model.n0_quarter) * kk);
}

ModelDeviation reduced_model_deviation(const LiouvilleMap& map, double re_start, double im, double window,
                                       int samples, const IntegratorConfig& cfg) {
  if (samples < 2 || !(window > 0)) throw DomainError("reduced_model_deviation: need window > 0 and >= 2 samples");
  const AsymptoticModel model = AsymptoticModel::from_map(map, AsymptoticModel::Mode::reduced);
  const double b = model.travel_time;
  std::vector<cplx> ks, lhs, rhs;
  std::vector<double> env;
  for (int i = 0; i < samples; ++i) {
    const cplx k(re_start + window * i / (samples - 1), im);
    const ScaledComplex kk(k);
    const ScaledComplex k3i = ScaledComplex(cplx(0, 1)) * kk * kk * kk;
    const double log_env = std::log(std::norm(k) * std::exp((std::abs(1 - b) - (1 + b)) * std::abs(im)) + 1) +
                           (1 + b) * std::abs(im);
    // Both sides divided by the envelope before leaving scaled arithmetic.
    lhs.push_back((k3i * d0(map.profile(), k, cfg) * ScaledComplex(model.n0_quarter)).scaled_by_exp(-log_env).value());
    rhs.push_back((k3i * d0_asymptotic(model, k)).scaled_by_exp(-log_env).value());
    ks.push_back(k);
  }
  cplx num = 0;
  double den = 0;
  for (int i = 0; i < samples; ++i) {
    num += std::conj(lhs[i]) * rhs[i];
    den += std::norm(lhs[i]);
  }
  ModelDeviation out;
  out.samples = samples;
  out.scale = den > 0 ? num / den : cplx(0);
  for (int i = 0; i < samples; ++i) out.deviation = std::max(out.deviation, std::abs(out.scale * lhs[i] - rhs[i]));
  return out;
}

IndicatorReport indicator_estimate(const LiouvilleMap& map, double theta, const std::vector<double>& radii,
                                   const IntegratorConfig& cfg, double max_radius) {
  if (std::abs(std::sin(theta)) < 1e-9) {
    throw DomainError("indicator_estimate: theta must stay off the real axis");
  }
  if (radii.size() < 2) throw DomainError("indicator_estimate: need at least two radii");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0) || (i > 0 && !(radii[i] > radii[i - 1])))
      throw DomainError("indicator_estimate: radii must be positive and strictly increasing");
  }
  if (radii.back() > max_radius) throw DomainError("indicator_estimate: radius beyond budget");

  IndicatorReport rep;
  rep.theta = theta;
  rep.radii = radii;
  rep.target = (1 + map.total_travel_time()) * std::abs(std::sin(theta));
  for (double radius : radii) {
    double angle = theta;
    D0Pair f = d0_with_derivative(map.profile(), std::polar(radius, angle), cfg);
    // |D0 / D0'| estimates the distance to the nearest zero.
    for (int attempt = 0; attempt < 8; ++attempt) {
      const double dist = f.value.is_zero() ? 0.0 : std::exp(f.value.log_abs() - f.derivative.log_abs());
      if (dist >= 1e-3) break;
      angle += 1e-3 / radius * (attempt % 2 == 0 ? 1 : -1) * (attempt + 1);
      std::ostringstream note;
      note << "R = " << radius << ": zero within " << dist << ", dithered angle to " << angle;
      rep.notes.push_back(note.str());
      f = d0_with_derivative(map.profile(), std::polar(radius, angle), cfg);
    }
    rep.raw.push_back(f.value.log_abs() / radius);
  }

  // Least squares for raw = h + c / R.
  Eigen::MatrixXd a(radii.size(), 2);
  Eigen::VectorXd y(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) {
    a(i, 0) = 1;
    a(i, 1) = 1 / radii[i];
    y(i) = rep.raw[i];
  }
  const Eigen::Vector2d sol = a.colPivHouseholderQr().solve(y);
  rep.extrapolated = sol(0);
  rep.slope = sol(1);
  return rep;
}

HorizontalBounds horizontal_bounds(const LiouvilleMap& map, double h, double x_min, double x_max, int samples,
                                   const IntegratorConfig& cfg, double h_min) {
  const double b = map.total_travel_time();
  if (h_min <= 0) h_min = 2 * kPi / (1 + b);
  if (std::abs(h) < h_min) {
    std::ostringstream msg;
    msg << "horizontal_bounds: |h| = " << std::abs(h) << " below minimum offset " << h_min;
    throw DomainError(msg.str());
  }
  if (samples < 2 || !(x_max > x_min)) throw DomainError("horizontal_bounds: need x_max > x_min and >= 2 samples");
  HorizontalBounds out;
  out.h = h;
  out.x_min = x_min;
  out.x_max = x_max;
  out.samples = samples;
  out.min_abs = std::numeric_limits<double>::infinity();
  out.max_abs = 0;
  const double shift = (1 + b) * std::abs(h);
  for (int i = 0; i < samples; ++i) {
    const double x = x_min + (x_max - x_min) * i / (samples - 1);
    const ScaledComplex v = d0(map.profile(), cplx(x, h), cfg);
    const double a = v.is_zero() ? 0.0 : std::exp(v.log_abs() - shift);
    out.min_abs = std::min(out.min_abs, a);
    out.max_abs = std::max(out.max_abs, a);
  }
  out.near_zero = out.min_abs < 1e-8;
  return out;
}

EigenpairCoefficients eigenpair_coefficients(const LiouvilleMap& map, cplx k, const IntegratorConfig& cfg,
                                             double zero_tol) {
  const SolutionSample s = integrate(map.profile(), k, 1.0, cfg);
  const ScaledComplex det = assemble(s, k);
  const double residual = normalized_abs(det, k, map.total_travel_time());
  if (residual > zero_tol) {
    std::ostringstream msg;
    msg << "k = " << k << " is not an eigenvalue: normalized |D0| = " << residual;
    throw NotAnEigenvalueError(msg.str());
  }

  // [[ j0(k), -y(1) ], [ d/dr j0(kr)|_1, -(y/r)'|_1 ]]
  const ScaledComplex j0 = sinc(k);
  const ScaledComplex dj0 = scaled_cos(k) - j0;
  const ScaledComplex c0 = -s.y;
  const ScaledComplex c1 = -(s.dy - s.y);
  const double top = std::max({j0.log_abs(), dj0.log_abs(), c0.log_abs(), c1.log_abs()});
  Eigen::Matrix2cd m;
  m << j0.scaled_by_exp(-top).value(), c0.scaled_by_exp(-top).value(), dj0.scaled_by_exp(-top).value(),
      c1.scaled_by_exp(-top).value();

  Eigen::JacobiSVD<Eigen::Matrix2cd> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  EigenpairCoefficients out;
  out.k = k;
  out.matching_residual = sv(0) > 0 ? sv(1) / sv(0) : 0.0;
  if (out.matching_residual > zero_tol) {
    std::ostringstream msg;
    msg << "k = " << k << " is not an eigenvalue: matching residual " << out.matching_residual;
    throw NotAnEigenvalueError(msg.str());
  }
  Eigen::Vector2cd v = svd.matrixV().col(1);
  v /= v.norm();
  // Fix the free phase: first non-negligible component real and positive.
  const int lead = std::abs(v(0)) > 1e-14 ? 0 : 1;
  v *= std::conj(v(lead)) / std::abs(v(lead));
  out.a00 = v(0);
  out.b00 = v(1);
  return out;
}

}  // namespace ite
