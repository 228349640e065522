#include "ite/riesz.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ite/errors.hpp"
#include "ite/parallel.hpp"
#include "ite/quadrature.hpp"

namespace ite {

namespace {

constexpr double kPi = 3.14159265358979323846;

double max_abs_real(const ExponentialSystem& system, std::size_t n) {
  double top = 0;
  for (std::size_t j = 0; j < n; ++j) top = std::max(top, std::abs(system.nodes[j].real()));
  return top;
}

void check_truncation(const ExponentialSystem& system, std::size_t n, const char* who) {
  if (n < 1 || n > system.size()) {
    std::ostringstream msg;
    msg << who << ": truncation " << n << " outside [1, " << system.size() << "]";
    throw DomainError(msg.str());
  }
}

}  // namespace

ExponentialSystem ExponentialSystem::from_nodes(std::vector<cplx> nodes, double half_length) {
  if (!(half_length > 0)) throw DomainError("exponential system: half_length must be positive");
  ExponentialSystem s;
  s.half_length = half_length;
  s.nodes = std::move(nodes);
  s.multiplicities.assign(s.nodes.size(), 1);
  for (std::size_t i = 0; i < s.nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < s.nodes.size(); ++j) {
      if (std::abs(s.nodes[i] - s.nodes[j]) < 1e-14 * std::max(1.0, std::abs(s.nodes[i]))) {
        std::ostringstream w;
        w << "nodes " << i << " and " << j << " coincide; the Gram matrix is singular";
        s.warnings.push_back(w.str());
      }
    }
  }
  return s;
}

ExponentialSystem build_system(const Spectrum& spectrum, double travel_time) {
  if (spectrum.zeros.empty()) throw DomainError("build_system: empty spectrum");
  if (!(travel_time > 0)) throw DomainError("build_system: B must be positive");
  ExponentialSystem s;
  s.half_length = 1 + travel_time;
  s.fingerprint = spectrum.profile_fingerprint;
  if (!spectrum.complete) s.warnings.push_back("source spectrum is incomplete");

  std::vector<std::pair<cplx, int>> pts;
  for (const auto& z : spectrum.zeros) pts.emplace_back(z.k, z.multiplicity);
  if (spectrum.region.re_min >= 0) {
    for (const auto& z : spectrum.zeros) {
      const cplx m = -z.k;
      const bool present = std::any_of(spectrum.zeros.begin(), spectrum.zeros.end(),
                                       [&](const ZeroRecord& o) { return std::abs(o.k - m) < 1e-8; });
      if (!present) pts.emplace_back(m, z.multiplicity);
    }
  }
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    const double ra = std::abs(a.first.real()), rb = std::abs(b.first.real());
    if (ra != rb) return ra < rb;
    if (a.first.imag() != b.first.imag()) return a.first.imag() < b.first.imag();
    return a.first.real() < b.first.real();
  });
  int repeated = 0;
  for (const auto& [k, m] : pts) {
    s.nodes.push_back(k);
    s.multiplicities.push_back(m);
    if (m > 1) ++repeated;
  }
  if (repeated > 0) {
    std::ostringstream w;
    w << repeated << " nodes come from multiple zeros and enter once (no r^m e^{ikr} companions)";
    s.warnings.push_back(w.str());
  }
  return s;
}

Eigen::MatrixXcd gram(const ExponentialSystem& system, std::size_t n, int workers) {
  check_truncation(system, n, "gram");
  const double a = system.half_length;
  Eigen::MatrixXcd g(n, n);
  parallel_for(n, workers, [&](std::size_t j) {
    for (std::size_t l = j; l < n; ++l) {
      const cplx mu = system.nodes[j] - std::conj(system.nodes[l]);
      cplx v = std::abs(mu) < 1e-14 ? cplx(2 * a) : 2.0 * std::sin(a * mu) / mu;
      if (l == j) v = cplx(v.real(), 0.0);
      g(j, l) = v;
    }
  });
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t l = 0; l < j; ++l) g(j, l) = std::conj(g(l, j));
  return g;
}

FrameReport frame_bounds(const ExponentialSystem& system, std::vector<std::size_t> ns, int workers) {
  if (ns.empty()) throw DomainError("frame_bounds: empty truncation list");
  std::sort(ns.begin(), ns.end());
  for (std::size_t n : ns) check_truncation(system, n, "frame_bounds");
  FrameReport rep;
  for (std::size_t n : ns) {
    const Eigen::MatrixXcd g = gram(system, n, workers);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g);
    if (es.info() != Eigen::Success) {
      throw NumericalError("frame_bounds: Hermitian eigensolver did not converge at N = " + std::to_string(n));
    }
    const Eigen::VectorXd& lam = es.eigenvalues();
    FrameEntry e;
    e.n = n;
    e.lambda_min = lam(0);
    e.lambda_max = lam(n - 1);
    e.condition = e.lambda_min > 0 ? e.lambda_max / e.lambda_min : std::numeric_limits<double>::infinity();
    const double norm = std::max(std::abs(lam(0)), std::abs(lam(n - 1)));
    for (Eigen::Index i : {Eigen::Index(0), Eigen::Index(n - 1)}) {
      const Eigen::VectorXcd v = es.eigenvectors().col(i);
      e.eigen_residual = std::max(e.eigen_residual, (g * v - lam(i) * v).norm() / norm);
    }
    if (e.eigen_residual > 1e-8) {
      std::ostringstream msg;
      msg << "frame_bounds: eigenpair residual " << e.eigen_residual << " at N = " << n;
      throw NumericalError(msg.str());
    }
    if (e.lambda_min < -1e-10 * g.trace().real() / n) rep.positive_semidefinite = false;
    rep.entries.push_back(e);
  }
  const FrameEntry& first = rep.entries.front();
  const FrameEntry& last = rep.entries.back();
  rep.lower_bounded = first.lambda_min > 0 && last.lambda_min / first.lambda_min >= 0.5;
  rep.upper_bounded = last.lambda_max <= 2 * first.lambda_max;
  return rep;
}

QuadratureGrid QuadratureGrid::make(double half_length, int panels, int order) {
  if (!(half_length > 0) || panels < 1 || order < 2) {
    throw DomainError("quadrature grid: need a > 0, panels >= 1 and order >= 2");
  }
  QuadratureGrid g;
  g.half_length = half_length;
  g.panels = panels;
  g.order = order;
  const quad::GaussRule rule = quad::gauss_legendre(order);
  const double h = 2 * half_length / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = -half_length + (p + 0.5) * h;
    for (int i = 0; i < order; ++i) {
      g.r.push_back(mid + 0.5 * h * rule.nodes[i]);
      g.w.push_back(0.5 * h * rule.weights[i]);
    }
  }
  return g;
}

QuadratureGrid QuadratureGrid::for_system(const ExponentialSystem& system, std::size_t n, double per_period,
                                          int order) {
  check_truncation(system, n, "quadrature grid");
  const double a = system.half_length;
  const double freq = std::max(1.0, max_abs_real(system, n));
  const double points = per_period * freq / (2 * kPi) * 2 * a;
  return make(a, std::max(1, static_cast<int>(std::ceil(points / order))), order);
}

double QuadratureGrid::points_per_period(double frequency) const {
  if (frequency <= 0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(r.size()) / (2 * half_length) * (2 * kPi / frequency);
}

ExpansionResult expand(const QuadratureGrid& grid, const std::vector<cplx>& f, const ExponentialSystem& system,
                       std::size_t n, bool normalize, int workers) {
  check_truncation(system, n, "expand");
  if (f.size() != grid.r.size()) throw DomainError("expand: sample count does not match the grid");
  if (std::abs(grid.half_length - system.half_length) > 1e-12 * system.half_length) {
    throw DomainError("expand: grid interval differs from the system interval");
  }
  const double ppp = grid.points_per_period(max_abs_real(system, n));
  if (ppp < 8) {
    std::ostringstream msg;
    msg << "expand: grid has " << ppp << " points per period of the fastest exponential (need >= 8)";
    throw DomainError(msg.str());
  }

  Eigen::MatrixXcd g = gram(system, n, workers);
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(n);
  if (normalize) {
    for (std::size_t j = 0; j < n; ++j) scale(j) = 1 / std::sqrt(g(j, j).real());
    g = scale.asDiagonal() * g * scale.asDiagonal();
  }

  const std::size_t m = grid.r.size();
  Eigen::MatrixXcd e(m, n);
  parallel_for(n, workers, [&](std::size_t j) {
    for (std::size_t i = 0; i < m; ++i) e(i, j) = scale(j) * std::exp(cplx(0, 1) * system.nodes[j] * grid.r[i]);
  });
  const Eigen::Map<const Eigen::VectorXd> w(grid.w.data(), m);
  const Eigen::Map<const Eigen::VectorXcd> fv(f.data(), m);

  ExpansionResult out;
  out.n = n;
  out.normalized = normalize;
  const Eigen::MatrixXcd gq = e.adjoint() * w.asDiagonal() * e;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t l = 0; l < n; ++l) {
      const double ref = std::sqrt(g(j, j).real() * g(l, l).real());
      out.quadrature_error = std::max(out.quadrature_error, std::abs(gq(j, l) - g(j, l)) / ref);
    }
  }

  const double f_norm2 = (w.array() * fv.array().abs2()).sum();
  if (f_norm2 == 0) {
    out.coefficients = Eigen::VectorXcd::Zero(n);
    return out;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  const double lmax = es.eigenvalues()(n - 1);
  if (!(lmin >= 1e-10 * lmax)) {
    std::ostringstream msg;
    msg << "expand: Gram matrix numerically singular at N = " << n << " (lambda_min " << lmin << ", lambda_max "
        << lmax << "); use a smaller N or normalize";
    throw ConditioningError(msg.str());
  }

  const Eigen::VectorXcd b = e.adjoint() * (w.asDiagonal() * fv);
  Eigen::LLT<Eigen::MatrixXcd> llt(g);
  if (llt.info() != Eigen::Success) throw ConditioningError("expand: Cholesky factorization failed");
  Eigen::VectorXcd c = llt.solve(b);
  for (int step = 0; step < 5; ++step) {
    const Eigen::VectorXcd r = b - g * c;
    if (r.norm() <= 1e-15 * b.norm()) break;
    c += llt.solve(r);
    out.refinement_steps = step + 1;
  }
  out.coefficients = c;
  const Eigen::VectorXcd gap = fv - e * c;
  out.residual = std::sqrt((w.array() * gap.array().abs2()).sum() / f_norm2);
  return out;
}

CompletenessReport completeness_density(const ExponentialSystem& system, const std::vector<double>& radii) {
  CompletenessReport rep;
  rep.radii = radii;
  rep.target = 2 * system.half_length / kPi;
  for (double r : radii) {
    if (!(r > 0)) throw DomainError("completeness_density: radii must be positive");
    int count = 0, distinct = 0;
    for (std::size_t j = 0; j < system.size(); ++j) {
      if (std::abs(system.nodes[j]) > r) continue;
      count += system.multiplicities[j];
      ++distinct;
    }
    rep.counts.push_back(count);
    rep.distinct_counts.push_back(distinct);
    rep.estimates.push_back(count / r);
  }
  return rep;
}

}  // namespace ite
