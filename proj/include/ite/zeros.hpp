#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ite/determinant.hpp"

namespace ite {

/// Axis-aligned rectangle in the complex k-plane.
struct Box {
  double re_min = 0;
  double re_max = 0;
  double im_min = 0;
  double im_max = 0;

  double width() const { return re_max - re_min; }
  double height() const { return im_max - im_min; }
  double min_side() const { return std::min(width(), height()); }
  double max_side() const { return std::max(width(), height()); }
  cplx centre() const { return {0.5 * (re_min + re_max), 0.5 * (im_min + im_max)}; }
  bool contains(cplx k, double pad = 0) const {
    return k.real() >= re_min - pad && k.real() <= re_max + pad && k.imag() >= im_min - pad &&
           k.imag() <= im_max + pad;
  }
  bool straddles_real_axis() const { return im_min < 0 && im_max > 0; }
  /// Throws DomainError unless the interior is non-empty.
  void validate() const;

  bool operator==(const Box&) const = default;
};

struct ZeroRecord {
  cplx k{0};
  double residual = 0;  // envelope-normalised |D0(k)|
  int multiplicity = 1;
  int newton_iters = 0;
  Box origin_box;
};

struct Spectrum {
  std::vector<ZeroRecord> zeros;  // ordered by real part, then imaginary part
  Box region;                     // search box actually used (after any jitter)
  std::string profile_fingerprint;
  double travel_time = 0;
  int region_winding = 0;         // argument-principle count of the whole region
  int leaf_winding_sum = 0;       // sum of the counts of all accepted leaf boxes
  int excluded_multiplicity = 0;  // zeros inside the disk around k = 0
  bool complete = true;
  long evaluations = 0;
  std::vector<std::string> notes;

  int total_multiplicity() const;
};

struct ZeroSearchConfig {
  IntegratorConfig integrator;
  double zero_tol = 1e-10;
  double merge_tol = 1e-8;
  /// Contour samples closer than boundary_tol * (box side) to a zero count as collisions.
  double boundary_tol = 1e-6;
  /// A box with count m >= 2 whose zeros spread less than this around their
  /// centroid is reported as one record of multiplicity m.
  double cluster_size = 1e-3;
  double exclusion_radius = 0.1;
  double max_abs_imag = 20;
  long max_evaluations = 4'000'000;
  std::uint64_t seed = 0x5eed;
  int workers = 1;

  void validate() const;
};

/// Argument-principle zero count of D0 inside `box`.
///
/// On a boundary collision the box is inflated by a seeded jitter of at most
/// 1% of its smaller side and retried up to five times before throwing
/// BoundaryCollisionError. `used` receives the box that was finally counted.
int winding_count(const LiouvilleMap& map, const Box& box, const ZeroSearchConfig& cfg = {}, Box* used = nullptr);

/// Newton refinement of a zero of D0 from k0.
///
/// `multiplicity` > 1 switches to the modified step k -= m D/D'. When `box`
/// is given the iteration must stay inside it; real starting points inside
/// a box that straddles the axis fall back to bisection along the axis.
ZeroRecord refine(const LiouvilleMap& map, cplx k0, const ZeroSearchConfig& cfg = {}, const Box* box = nullptr,
                  int multiplicity = 1);

/// All zeros of D0 in `region` by recursive subdivision and refinement.
///
/// Throws DegenerateDeterminantError when D0 vanishes identically. On budget
/// exhaustion the partial spectrum is returned with complete == false.
Spectrum locate(const LiouvilleMap& map, const Box& region, const ZeroSearchConfig& cfg = {});

struct Sector {
  double alpha = 0;
  double beta = 0;
};

struct DensityReport {
  std::vector<Sector> sectors;
  std::vector<double> radii;
  std::vector<std::vector<int>> counts;        // [sector][radius], with multiplicity
  std::vector<std::vector<double>> estimates;  // counts / r (order 1)
  std::vector<std::optional<double>> targets;  // limiting densities for the canonical sectors
  int order = 1;
  bool mirrored = false;  // left half-plane filled in by D0(-k) = D0(k)
  std::vector<std::string> caveats;
};

/// The four canonical sectors around the real and imaginary directions, with their limiting densities.
std::vector<Sector> canonical_sectors(double epsilon);

DensityReport density(const Spectrum& spectrum, const std::vector<Sector>& sectors, const std::vector<double>& radii);

struct StripReport {
  double start = 0;
  double length = 0;
  double half_width = 0;
  int total = 0;
  double predicted = 0;  // length (1+B) / pi
  bool classified = true;
  int family_near = 0;   // nearest to the pi/(1+B) grid
  int family_far = 0;    // nearest to the pi/|1-B| grid
  int unclassified = 0;
};

StripReport strip_report(const Spectrum& spectrum, double start, double length, double half_width);

struct SeparationResult {
  std::optional<double> delta;  // half the minimum pairwise distance; empty with < 2 zeros
  std::vector<std::pair<cplx, cplx>> violations;
  std::vector<cplx> non_simple;  // multiplicity > 1 beyond the exclusion radius
  int considered = 0;
};

/// Default exclusion radius 3 pi / (1+B).
double default_exclusion_radius(double travel_time);

SeparationResult separation(const Spectrum& spectrum, double exclusion_radius, double near_collision = 1e-3);

}  // namespace ite
