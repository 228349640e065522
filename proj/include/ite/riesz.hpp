#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ite/zeros.hpp"

namespace ite {

/// Exponentials e^{i k_j r} on (-a, a), a = 1 + B.
struct ExponentialSystem {
  std::vector<cplx> nodes;          // ordered by |Re k|, then Im k, then Re k
  std::vector<int> multiplicities;  // zero multiplicity behind each node (1 for hand-built systems)
  double half_length = 0;
  std::string fingerprint;
  std::vector<std::string> warnings;

  std::size_t size() const { return nodes.size(); }

  /// Hand-built system (Fourier controls, sentinels). Nodes are kept in the
  /// given order and duplicates are allowed, with a warning.
  static ExponentialSystem from_nodes(std::vector<cplx> nodes, double half_length);
};

/// Nodes are the distinct zeros of the spectrum. A search region in the right
/// half-plane is mirrored through k -> -k since D0 is even.
ExponentialSystem build_system(const Spectrum& spectrum, double travel_time);

/// G_jl = integral over (-a, a) of e^{i k_j r} conj(e^{i k_l r}) dr for the first n nodes.
Eigen::MatrixXcd gram(const ExponentialSystem& system, std::size_t n, int workers = 1);

struct FrameEntry {
  std::size_t n = 0;
  double lambda_min = 0;
  double lambda_max = 0;
  double condition = 0;
  double eigen_residual = 0;  // max ||G v - lambda v|| / ||G|| over the two extreme pairs
};

struct FrameReport {
  std::vector<FrameEntry> entries;  // ordered by n
  bool lower_bounded = false;       // lambda_min(n_max) / lambda_min(n_min) >= 0.5
  bool upper_bounded = false;       // lambda_max(n_max) <= 2 lambda_max(n_min)
  bool positive_semidefinite = true;
};

FrameReport frame_bounds(const ExponentialSystem& system, std::vector<std::size_t> ns, int workers = 1);

/// Composite Gauss-Legendre rule on [-a, a].
struct QuadratureGrid {
  double half_length = 0;
  int panels = 0;
  int order = 0;
  std::vector<double> r;
  std::vector<double> w;

  static QuadratureGrid make(double half_length, int panels, int order = 16);
  /// Smallest grid with at least `per_period` points per period of the fastest node.
  static QuadratureGrid for_system(const ExponentialSystem& system, std::size_t n, double per_period = 16,
                                   int order = 16);
  double points_per_period(double frequency) const;
};

struct ExpansionResult {
  std::size_t n = 0;
  Eigen::VectorXcd coefficients;
  double residual = 0;          // relative L2 norm of f - sum c_j e_j
  double quadrature_error = 0;  // largest relative gap between quadrature and closed-form Gram entries
  int refinement_steps = 0;
  bool normalized = false;
};

/// Least-squares expansion of sampled f in the first n exponentials.
///
/// With `normalize` the exponentials are scaled to unit norm and the
/// coefficients refer to the scaled functions.
ExpansionResult expand(const QuadratureGrid& grid, const std::vector<cplx>& f, const ExponentialSystem& system,
                       std::size_t n, bool normalize = false, int workers = 1);

struct CompletenessReport {
  std::vector<double> radii;
  std::vector<int> counts;           // with multiplicity
  std::vector<int> distinct_counts;  // nodes only
  std::vector<double> estimates;     // counts / r
  double target = 0;                 // 2 (1+B) / pi
};

CompletenessReport completeness_density(const ExponentialSystem& system, const std::vector<double>& radii);

}  // namespace ite
