#include <doctest.h>

#include <cmath>
#include <random>

#include "ite/errors.hpp"
#include "ite/radial_solver.hpp"
#include "oracles.hpp"

using ite::IntegratorConfig;
using ite::LiouvilleMap;
using ite::RadialProfile;
using ite::ScaledComplex;
using oracle::cplx;

namespace {

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

// Least-squares slope of log(err) against log(k).
double loglog_slope(const std::vector<double>& k, const std::vector<double>& err) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double x = std::log(k[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("closed-form solutions for constant profiles") {
  const auto four = RadialProfile::constant(4);
  auto s = ite::integrate(four, 1.0, 1.0);
  CHECK(s.y.value().real() == doctest::Approx(std::sin(2.0) / 2).epsilon(1e-12));
  CHECK(s.dy.value().real() == doctest::Approx(std::cos(2.0)).epsilon(1e-12));
  CHECK(s.r == 1.0);

  const auto one = RadialProfile::constant(1);
  s = ite::integrate(one, oracle::pi, 1.0);
  CHECK(std::abs(s.y.value()) < 1e-12);
  CHECK(s.dy.value().real() == doctest::Approx(-1).epsilon(1e-12));
}

TEST_CASE("k = 0 gives the straight line") {
  for (const auto& p : {RadialProfile::constant(4), RadialProfile::smooth_bump(3, 3)}) {
    const auto s = ite::integrate_with_k_derivative(p, 0.0, 1.0);
    CHECK(s.y.value() == cplx(1));
    CHECK(s.dy.value() == cplx(1));
    CHECK(s.dk_y->is_zero());
    CHECK(s.dk_dy->is_zero());
  }
}

TEST_CASE("oracle equivalence on real and imaginary wavenumbers") {
  for (double n0 : {1.0, 2.25, 4.0}) {
    const auto p = RadialProfile::constant(n0);
    const double s = std::sqrt(n0);
    double worst = 0;
    for (int i = 0; i < 50; ++i) {
      for (cplx k : {cplx(0.5 + 59.5 * i / 49, 0), cplx(0, 0.5 + 19.5 * i / 49)}) {
        for (double r : {0.3, 1.0}) {
          const auto sample = ite::integrate(p, k, r);
          const ScaledComplex exact = ite::scaled_sin(k * s * r) / ScaledComplex(k * s);
          const ScaledComplex dexact = ite::scaled_cos(k * s * r);
          worst = std::max({worst, ite::relative_difference(sample.y, exact),
                            ite::relative_difference(sample.dy, dexact)});
        }
      }
    }
    CAPTURE(n0);
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("k-derivative against closed forms and central differences") {
  const auto one = RadialProfile::constant(1);
  const auto s = ite::integrate_with_k_derivative(one, 1.0, 1.0);
  CHECK(s.dk_y->value().real() == doctest::Approx(std::cos(1.0) - std::sin(1.0)).epsilon(1e-11));

  const double h = 1e-5;
  for (const auto& p : {RadialProfile::constant(4), RadialProfile::smooth_bump(3, 3)}) {
    for (cplx k : {cplx(2, 0), cplx(7, 1.5), cplx(-3, -2)}) {
      const auto d = ite::integrate_with_k_derivative(p, k, 1.0);
      const cplx fd = (ite::integrate(p, k + h, 1.0).y.value() - ite::integrate(p, k - h, 1.0).y.value()) / (2 * h);
      const cplx fdd =
          (ite::integrate(p, k + h, 1.0).dy.value() - ite::integrate(p, k - h, 1.0).dy.value()) / (2 * h);
      CHECK(rel(d.dk_y->value(), fd) <= 1e-6);
      CHECK(rel(d.dk_dy->value(), fdd) <= 1e-6);
    }
  }
}

TEST_CASE("conjugation and evenness in k") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> re(0.5, 50), im(-8, 8);
  const auto p = RadialProfile::smooth_bump(3, 3);
  for (int i = 0; i < 20; ++i) {
    const cplx k(re(rng), im(rng));
    const auto a = ite::integrate(p, k, 1.0);
    const auto c = ite::integrate(p, std::conj(k), 1.0);
    const auto m = ite::integrate(p, -k, 1.0);
    CHECK(ite::relative_difference(c.y, a.y.conj()) <= 1e-12);
    CHECK(ite::relative_difference(c.dy, a.dy.conj()) <= 1e-12);
    CHECK(ite::relative_difference(m.y, a.y) <= 1e-10);
    CHECK(ite::relative_difference(m.dy, a.dy) <= 1e-10);
  }
  for (double k : {0.7, 13.0, 44.4}) {
    const auto a = ite::integrate(p, k, 1.0);
    CHECK(std::abs(a.y.mantissa().imag()) <= 1e-12 * std::abs(a.y.mantissa()));
    CHECK(std::abs(a.dy.mantissa().imag()) <= 1e-12 * std::abs(a.dy.mantissa()));
  }
}

TEST_CASE("defect against the oracle scales with the tolerance") {
  // The error controller keeps the global defect proportional to rel_tol;
  // halving it measures 1.96 to 2.01, so the check leaves a small margin.
  const auto p = RadialProfile::constant(4);
  for (cplx k : {cplx(30, 0), cplx(12, 3)}) {
    const ScaledComplex exact = ite::scaled_sin(2.0 * k) / ScaledComplex(2.0 * k);
    auto defect = [&](double tol) {
      IntegratorConfig c;
      c.rel_tol = tol;
      c.abs_tol = 1e-30;
      return ite::relative_difference(ite::integrate(p, k, 1.0, c).y, exact);
    };
    for (double tol : {1e-7, 1e-9}) {
      CHECK(defect(tol) / defect(tol / 2) >= 1.9);
    }
    CHECK(defect(1e-7) / defect(1e-9) >= 50);
  }
}

TEST_CASE("scaled growth stays finite and tracks the envelope") {
  const auto p = RadialProfile::smooth_bump(3, 3);
  const LiouvilleMap map(p);
  const double H = 10, B = map.total_travel_time();
  for (int i = 0; i <= 50; ++i) {
    const cplx k(static_cast<double>(i), H);
    const auto s = ite::integrate(p, k, 1.0);
    REQUIRE(s.y.is_finite());
    REQUIRE(s.dy.is_finite());
    // |y(1)| ~ e^{HB} / (2 |k| n(0)^{1/4}).
    CHECK(std::abs(s.y.log_abs() + std::log(std::abs(k)) - H * B) <= 1.5);
  }
  const auto far = ite::integrate(p, cplx(5, 400), 1.0);
  CHECK(far.y.is_finite());
  CHECK(far.y.log_abs() == doctest::Approx(400 * B).epsilon(0.02));
}

TEST_CASE("integrator configuration is validated") {
  IntegratorConfig c;
  c.rel_tol = 1e-15;
  CHECK_THROWS_AS(c.validate(), ite::DomainError);
  c = {};
  c.max_steps = 10;
  CHECK_THROWS_AS(c.validate(), ite::DomainError);
  c = {};
  c.abs_tol = 0;
  CHECK_THROWS_AS(c.validate(), ite::DomainError);
  CHECK_NOTHROW(IntegratorConfig{}.validate());
}

TEST_CASE("step exhaustion reports the reached radius") {
  IntegratorConfig c;
  c.max_steps = 1000;
  try {
    ite::integrate(RadialProfile::smooth_bump(3, 3), cplx(5000, 0), 1.0, c);
    FAIL("expected StepLimitError");
  } catch (const ite::StepLimitError& e) {
    CHECK(e.reached_radius() > 0);
    CHECK(e.reached_radius() < 1);
  }
}

TEST_CASE("asymptotic z for a constant profile is exact") {
  const LiouvilleMap map(RadialProfile::constant(2.25));
  for (cplx k : {cplx(3, 0), cplx(17, -2)}) {
    const auto a = ite::asymptotic_z(map, 0.6, k, 2);
    const double xi = 1.5 * 0.6;
    CHECK(rel(a.z.value(), std::sin(k * xi) / k) <= 1e-13);
    CHECK(rel(a.dz.value(), std::cos(k * xi)) <= 1e-13);
    // z = n^{1/4} y and y' = sqrt(n0) z' for constant n0, with z'(0) = n0^{-1/4}.
    const auto z = ite::to_liouville(map.profile(), ite::integrate(map.profile(), k, 0.6));
    const ScaledComplex q(std::pow(2.25, 0.25));
    CHECK(ite::relative_difference(z.z * q, a.z) <= 1e-10);
    CHECK(ite::relative_difference(z.dz * q, a.dz) <= 1e-10);
  }
  CHECK_THROWS_AS(ite::asymptotic_z(map, 1.0, cplx(0.5, 0), 2), ite::DomainError);
  CHECK_NOTHROW(ite::asymptotic_z(map, 1.0, cplx(0.5, 0), 2, 0.1));
  CHECK_THROWS_AS(ite::asymptotic_z(map, 1.0, 5.0, 3), ite::DomainError);
}

TEST_CASE("asymptotic z for the bump converges at the expected rates") {
  const LiouvilleMap map(RadialProfile::smooth_bump(3, 3));
  const double q0 = std::pow(4.0, 0.25), B = map.total_travel_time();
  std::vector<double> ks{20, 40, 80}, ez, edz;
  for (double R : ks) {
    double mz = 0, mdz = 0;
    for (int i = 0; i <= 32; ++i) {
      const cplx k(R + oracle::pi * i / 32, 2);
      const auto z = ite::to_liouville(map.profile(), ite::integrate(map.profile(), k, 1.0));
      const auto a = ite::asymptotic_z(map, 1.0, k, 2);
      mz = std::max(mz, std::abs((a.z - z.z * ScaledComplex(q0)).scaled_by_exp(-2 * B).value()));
      mdz = std::max(mdz, std::abs((a.dz - z.dz * ScaledComplex(q0)).scaled_by_exp(-2 * B).value()));
    }
    ez.push_back(mz);
    edz.push_back(mdz);
  }
  const double sz = -loglog_slope(ks, ez), sdz = -loglog_slope(ks, edz);
  CAPTURE(sz);
  CAPTURE(sdz);
  CHECK(sz >= 3 / 1.5);
  CHECK(sz <= 3 * 1.5);
  CHECK(sdz >= 2 / 1.5);
  CHECK(sdz <= 2 * 1.5);

  // Imaginary direction: envelope-free relative error of the order-2 truncation.
  const cplx k(0, 40);
  const auto z = ite::to_liouville(map.profile(), ite::integrate(map.profile(), k, 1.0));
  const auto a = ite::asymptotic_z(map, 1.0, k, 2);
  CHECK(ite::relative_difference(a.z, z.z * ScaledComplex(q0)) <= 1e-3);
  CHECK(ite::relative_difference(a.dz, z.dz * ScaledComplex(q0)) <= 1e-3);
}
