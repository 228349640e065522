#include <doctest.h>

#include <cmath>
#include <random>

#include "ite/errors.hpp"
#include "ite/quadrature.hpp"
#include "ite/riesz.hpp"
#include "oracles.hpp"

using ite::ExponentialSystem;
using ite::QuadratureGrid;
using oracle::cplx;

namespace {

const ite::Spectrum& four_spectrum() {
  static const ite::LiouvilleMap map(ite::RadialProfile::constant(4));
  static const ite::Spectrum s = ite::locate(map, ite::Box{0.1, 40, -1, 1});
  return s;
}

ExponentialSystem fourier_system(int j_max, double a) {
  std::vector<cplx> nodes;
  nodes.emplace_back(0, 0);
  for (int j = 1; j <= j_max; ++j) {
    nodes.emplace_back(-j * oracle::pi / a, 0);
    nodes.emplace_back(j * oracle::pi / a, 0);
  }
  return ExponentialSystem::from_nodes(nodes, a);
}

std::vector<cplx> sample(const QuadratureGrid& g, const std::function<cplx(double)>& f) {
  std::vector<cplx> out;
  for (double r : g.r) out.push_back(f(r));
  return out;
}

}  // namespace

TEST_CASE("build_system assembles and mirrors the spectrum") {
  ite::Spectrum s;
  s.region = {-5, 5, -1, 1};
  s.travel_time = 2;
  for (double k : {-oracle::pi, oracle::pi}) {
    ite::ZeroRecord z;
    z.k = k;
    s.zeros.push_back(z);
  }
  const auto sys = ite::build_system(s, 2);
  CHECK(sys.size() == 2);
  CHECK(sys.half_length == 3);
  CHECK(sys.nodes[0] == cplx(-oracle::pi, 0));

  const auto full = ite::build_system(four_spectrum(), 2);
  // 12 triple zeros j pi in (0.1, 40), mirrored.
  CHECK(full.size() == 24);
  int total = 0;
  for (int m : full.multiplicities) total += m;
  CHECK(total == 72);
  CHECK_FALSE(full.warnings.empty());
  for (std::size_t i = 1; i < full.size(); ++i)
    CHECK(std::abs(full.nodes[i].real()) >= std::abs(full.nodes[i - 1].real()));

  ite::Spectrum empty;
  CHECK_THROWS_AS(ite::build_system(empty, 2), ite::DomainError);
  ite::Spectrum partial = s;
  partial.complete = false;
  CHECK_FALSE(ite::build_system(partial, 2).warnings.empty());
}

TEST_CASE("gram entries in closed form") {
  const auto one = ExponentialSystem::from_nodes({cplx(1.7, 0)}, 3);
  CHECK(ite::gram(one, 1)(0, 0) == cplx(6, 0));
  const double k = 0.9;
  const auto pm = ExponentialSystem::from_nodes({cplx(k, 0), cplx(-k, 0)}, 3);
  const auto g = ite::gram(pm, 2);
  CHECK(std::abs(g(0, 1) - std::sin(6 * k) / k) <= 1e-15);
  // Diagonal for a complex node: (e^{2a Im k} - e^{-2a Im k}) / (2 Im k).
  const auto cx = ExponentialSystem::from_nodes({cplx(2, 0.4)}, 3);
  CHECK(ite::gram(cx, 1)(0, 0).real() == doctest::Approx(std::sinh(2.4) / 0.4).epsilon(1e-14));
  CHECK_THROWS_AS(ite::gram(cx, 2), ite::DomainError);
}

TEST_CASE("gram matches adaptive quadrature for random nodes") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> re(-30, 30), im(-2, 2);
  std::vector<cplx> nodes;
  for (int i = 0; i < 8; ++i) nodes.emplace_back(re(rng), im(rng));
  const double a = 2.5;
  const auto sys = ExponentialSystem::from_nodes(nodes, a);
  const auto g = ite::gram(sys, 8, 3);
  for (int j = 0; j < 8; ++j) {
    for (int l = 0; l < 8; ++l) {
      auto f = [&](double r) { return std::exp(cplx(0, 1) * nodes[j] * r) * std::conj(std::exp(cplx(0, 1) * nodes[l] * r)); };
      const cplx q = ite::quad::integrate_adaptive<cplx>(f, -a, a, 1e-13, 20000).value;
      CHECK(std::abs(g(j, l) - q) <= 1e-10 * std::abs(q) + 1e-13);
    }
  }
  CHECK((g - g.adjoint()).norm() == 0);
}

TEST_CASE("frame bounds for Fourier nodes and for the n = 4 system") {
  const double a = 3;
  const auto fourier = fourier_system(40, a);
  const auto rep = ite::frame_bounds(fourier, {21, 41, 81});
  for (const auto& e : rep.entries) {
    CHECK(e.lambda_min == doctest::Approx(2 * a).epsilon(1e-12));
    CHECK(e.lambda_max == doctest::Approx(2 * a).epsilon(1e-12));
    CHECK(e.eigen_residual <= 1e-8);
  }
  CHECK(rep.lower_bounded);
  CHECK(rep.upper_bounded);
  CHECK(rep.positive_semidefinite);

  const auto sys = ite::build_system(four_spectrum(), 2);
  const auto r4 = ite::frame_bounds(sys, {20, 10});
  CHECK(r4.entries.front().n == 10);  // ordered by N
  for (const auto& e : r4.entries) {
    CHECK(e.lambda_min <= e.lambda_max);
    CHECK(e.lambda_min == doctest::Approx(6).epsilon(1e-10));
  }
  CHECK_THROWS_AS(ite::frame_bounds(sys, {}), ite::DomainError);
  CHECK_THROWS_AS(ite::frame_bounds(sys, {25}), ite::DomainError);
}

TEST_CASE("a duplicated node makes the gram matrix singular") {
  auto nodes = fourier_system(5, 3).nodes;
  nodes.push_back(nodes[3]);
  const auto sys = ExponentialSystem::from_nodes(nodes, 3);
  CHECK_FALSE(sys.warnings.empty());
  const auto rep = ite::frame_bounds(sys, {sys.size()});
  CHECK(std::abs(rep.entries[0].lambda_min) <= 1e-8 * 6);
  CHECK_FALSE(rep.lower_bounded);
  const auto grid = QuadratureGrid::for_system(sys, sys.size());
  CHECK_THROWS_AS(ite::expand(grid, sample(grid, [](double r) { return cplx(r); }), sys, sys.size()),
                  ite::ConditioningError);
}

TEST_CASE("quadrature grid") {
  const auto g = QuadratureGrid::make(3, 10, 16);
  CHECK(g.r.size() == 160);
  double sum = 0;
  for (double w : g.w) sum += w;
  CHECK(sum == doctest::Approx(6).epsilon(1e-14));
  CHECK(g.points_per_period(2 * oracle::pi) == doctest::Approx(160.0 / 6));
  CHECK_THROWS_AS(QuadratureGrid::make(0, 10), ite::DomainError);
  const auto sys = fourier_system(30, 3);
  const auto fit = QuadratureGrid::for_system(sys, sys.size());
  CHECK(fit.points_per_period(30 * oracle::pi / 3) >= 16);
}

TEST_CASE("expanding a member exponential gives a unit coefficient") {
  const auto sys = ite::build_system(four_spectrum(), 2);
  const std::size_t n = 20;
  const auto grid = QuadratureGrid::for_system(sys, n);
  for (std::size_t j : {std::size_t(0), std::size_t(7)}) {
    const cplx k = sys.nodes[j];
    const auto res = ite::expand(grid, sample(grid, [&](double r) { return std::exp(cplx(0, 1) * k * r); }), sys, n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(res.coefficients(i) - (i == j ? 1.0 : 0.0)) <= 1e-10);
    CHECK(res.residual <= 1e-8);
    CHECK(res.quadrature_error <= 1e-12);
  }
}

TEST_CASE("expanding zero gives zero") {
  const auto sys = fourier_system(5, 3);
  const auto grid = QuadratureGrid::for_system(sys, sys.size());
  const auto res = ite::expand(grid, std::vector<cplx>(grid.r.size()), sys, sys.size());
  CHECK(res.coefficients.norm() == 0);
  CHECK(res.residual == 0);
}

TEST_CASE("expansion residual does not grow over nested truncations") {
  const auto sys = ite::build_system(four_spectrum(), 2);
  const auto grid = QuadratureGrid::for_system(sys, sys.size());
  const auto f = sample(grid, [](double r) { return cplx(std::cos(oracle::pi * r / 6)); });
  double prev = 2;
  for (std::size_t n : {4, 8, 12, 16, 20, 24}) {
    const auto res = ite::expand(grid, f, sys, n);
    CHECK(res.residual >= 0);
    CHECK(res.residual <= prev + 1e-12);
    prev = res.residual;
  }
  const auto fg = fourier_system(12, 3);
  const auto gg = QuadratureGrid::for_system(fg, fg.size());
  const auto h = sample(gg, [](double r) { return cplx(std::exp(-r * r)); });
  double last = 2;
  for (std::size_t n : {5, 11, 17, 25}) {
    const double r = ite::expand(gg, h, fg, n).residual;
    CHECK(r <= last + 1e-12);
    last = r;
  }
}

TEST_CASE("Fourier nodes reproduce the classical coefficients") {
  const double a = 3;
  const auto sys = fourier_system(10, a);
  const auto grid = QuadratureGrid::for_system(sys, sys.size(), 32);
  auto f = [](double r) { return cplx(std::exp(0.3 * r) + r * r); };
  const auto res = ite::expand(grid, sample(grid, f), sys, sys.size());
  for (std::size_t j = 0; j < sys.size(); ++j) {
    const cplx k = sys.nodes[j];
    const cplx exact =
        ite::quad::integrate_adaptive<cplx>([&](double r) { return f(r) * std::exp(cplx(0, -1) * k * r); }, -a, a,
                                            1e-14)
            .value /
        (2 * a);
    CHECK(std::abs(res.coefficients(j) - exact) <= 1e-12);
  }
  // Normalized exponentials rescale each coefficient by sqrt(2a).
  const auto nrm = ite::expand(grid, sample(grid, f), sys, sys.size(), true);
  CHECK(nrm.normalized);
  CHECK(std::abs(nrm.coefficients(3) - res.coefficients(3) * std::sqrt(2 * a)) <= 1e-12);
}

TEST_CASE("expand validates its inputs") {
  const auto sys = fourier_system(10, 3);
  const auto coarse = QuadratureGrid::make(3, 1, 4);
  CHECK_THROWS_AS(ite::expand(coarse, std::vector<cplx>(coarse.r.size()), sys, sys.size()), ite::DomainError);
  const auto grid = QuadratureGrid::for_system(sys, sys.size());
  CHECK_THROWS_AS(ite::expand(grid, std::vector<cplx>(3), sys, sys.size()), ite::DomainError);
  const auto other = QuadratureGrid::make(2, 40);
  CHECK_THROWS_AS(ite::expand(other, std::vector<cplx>(other.r.size()), sys, 3), ite::DomainError);
}

TEST_CASE("completeness density") {
  const auto sys = ite::build_system(four_spectrum(), 2);
  const auto rep = ite::completeness_density(sys, {10, 20, 40});
  CHECK(rep.target == doctest::Approx(6 / oracle::pi));
  CHECK(std::abs(rep.estimates[2] - rep.target) <= 0.1 * rep.target);
  CHECK(rep.distinct_counts[2] == 24);

  const auto empty = ExponentialSystem::from_nodes({}, 3);
  CHECK(ite::completeness_density(empty, {5}).estimates[0] == 0);

  std::vector<cplx> one_sided, both;
  for (int j = 1; j <= 10; ++j) {
    one_sided.emplace_back(j * 1.1, 0);
    both.emplace_back(j * 1.1, 0);
    both.emplace_back(-j * 1.1, 0);
  }
  const auto a = ite::completeness_density(ExponentialSystem::from_nodes(one_sided, 3), {7.5});
  const auto b = ite::completeness_density(ExponentialSystem::from_nodes(both, 3), {7.5});
  CHECK(b.estimates[0] == 2 * a.estimates[0]);
}
