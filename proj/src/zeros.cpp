#include "ite/zeros.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <deque>
#include <map>
#include <random>
#include <sstream>

#include "ite/errors.hpp"
#include "ite/parallel.hpp"

namespace ite {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kCirclePoints = 128;
// Boxes at most this large are handed to Newton (count 1) or the moment probe (count >= 2).
constexpr double kNewtonBoxSize = 1.0;
constexpr double kClusterBoxSize = 0.5;

struct BudgetExhausted {};

std::string format_k(cplx k) {
  std::ostringstream os;
  os.precision(12);
  os << k.real() << (k.imag() < 0 ? "-" : "+") << std::abs(k.imag()) << "i";
  return os.str();
}

std::string format_box(const Box& b) {
  std::ostringstream os;
  os.precision(10);
  os << "[" << b.re_min << ", " << b.re_max << "]x[" << b.im_min << ", " << b.im_max << "]";
  return os.str();
}

double snap_imag(double im) { return std::abs(im) < 1e-10 ? 0.0 : im; }

// Uniform doubles in [0, 1) from a seed sequence over the seed, the box and the attempt.
class Jitter {
 public:
  Jitter(std::uint64_t seed, const Box& box, int attempt) {
    std::vector<std::uint32_t> words;
    auto push = [&](std::uint64_t v) {
      words.push_back(static_cast<std::uint32_t>(v));
      words.push_back(static_cast<std::uint32_t>(v >> 32));
    };
    push(seed);
    for (double v : {box.re_min, box.re_max, box.im_min, box.im_max}) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      push(bits);
    }
    push(static_cast<std::uint64_t>(attempt));
    std::seed_seq seq(words.begin(), words.end());
    engine_.seed(seq);
  }
  double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

class Evaluator {
 public:
  Evaluator(const LiouvilleMap& map, const ZeroSearchConfig& cfg) : map_(map), cfg_(cfg) {}

  std::vector<D0Pair> batch(const std::vector<cplx>& ks) {
    std::vector<D0Pair> out(ks.size());
    std::vector<std::size_t> missing;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      auto it = cache_.find(key(ks[i]));
      if (it != cache_.end()) {
        out[i] = it->second;
      } else {
        missing.push_back(i);
      }
    }
    if (evaluations_ + static_cast<long>(missing.size()) > cfg_.max_evaluations) throw BudgetExhausted{};
    std::vector<D0Pair> fresh(missing.size());
    parallel_for(missing.size(), cfg_.workers, [&](std::size_t j) {
      fresh[j] = d0_with_derivative(map_.profile(), ks[missing[j]], cfg_.integrator);
    });
    evaluations_ += static_cast<long>(missing.size());
    for (std::size_t j = 0; j < missing.size(); ++j) {
      out[missing[j]] = fresh[j];
      cache_.emplace(key(ks[missing[j]]), fresh[j]);
    }
    return out;
  }

  D0Pair at(cplx k) { return batch({k}).front(); }
  long evaluations() const { return evaluations_; }
  const LiouvilleMap& map() const { return map_; }

 private:
  static std::pair<double, double> key(cplx k) { return {k.real(), k.imag()}; }

  const LiouvilleMap& map_;
  const ZeroSearchConfig& cfg_;
  std::map<std::pair<double, double>, D0Pair> cache_;
  long evaluations_ = 0;
};

// log |D0' / D0|, +inf at an exact zero.
double log_rate(const D0Pair& p) {
  if (p.value.is_zero()) return std::numeric_limits<double>::infinity();
  if (p.derivative.is_zero()) return -std::numeric_limits<double>::infinity();
  return p.derivative.log_abs() - p.value.log_abs();
}

struct ContourCount {
  bool collision = false;
  int count = 0;
  cplx where{0};
};

// Winding number of D0 along the boundary of `box`, with adaptive refinement of
// each segment until the phase step is below pi/2 and |dk| |D0'/D0| <= 1.
ContourCount contour_count(Evaluator& ev, const Box& box, const ZeroSearchConfig& cfg) {
  const double b = ev.map().total_travel_time();
  const double h0 = 0.5 / (1 + b);
  const cplx corners[4] = {{box.re_min, box.im_min}, {box.re_max, box.im_min}, {box.re_max, box.im_max},
                           {box.re_min, box.im_max}};
  std::vector<cplx> pts;
  for (int e = 0; e < 4; ++e) {
    const cplx a = corners[e];
    const cplx c = corners[(e + 1) % 4];
    const int n = std::max(4, static_cast<int>(std::ceil(std::abs(c - a) / h0)));
    for (int i = 0; i < n; ++i) pts.push_back(a + (c - a) * (static_cast<double>(i) / n));
  }
  std::vector<D0Pair> vals = ev.batch(pts);
  // Keeping contours about cluster_size away from zeros stops cuts from splitting a cluster.
  const double near =
      std::log(std::max(cfg.boundary_tol * box.min_side(), std::min(cfg.cluster_size, 0.25 * box.min_side())));
  const double resolution = 1e-13 * std::max(1.0, std::abs(box.centre()));

  ContourCount out;
  for (int pass = 0; pass < 80; ++pass) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      // |D0 / D0'| approximates the distance to the nearest zero.
      if (-log_rate(vals[i]) < near) {
        out.collision = true;
        out.where = pts[i];
        return out;
      }
    }
    std::vector<std::size_t> split;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const std::size_t j = (i + 1) % pts.size();
      const double dk = std::abs(pts[j] - pts[i]);
      const double darg = (vals[j].value / vals[i].value).arg();
      const double rate = std::exp(std::max(log_rate(vals[i]), log_rate(vals[j])));
      if (std::abs(darg) >= kPi / 2 || dk * rate > 1) {
        if (dk < resolution) {
          out.collision = true;
          out.where = pts[i];
          return out;
        }
        split.push_back(i);
      }
    }
    if (split.empty()) {
      double total = 0;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        total += (vals[(i + 1) % pts.size()].value / vals[i].value).arg();
      }
      out.count = static_cast<int>(std::lround(total / (2 * kPi)));
      return out;
    }
    std::vector<cplx> mids;
    for (std::size_t i : split) mids.push_back(0.5 * (pts[i] + pts[(i + 1) % pts.size()]));
    const std::vector<D0Pair> mvals = ev.batch(mids);
    std::vector<cplx> npts;
    std::vector<D0Pair> nvals;
    npts.reserve(pts.size() + mids.size());
    nvals.reserve(pts.size() + mids.size());
    std::size_t s = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      npts.push_back(pts[i]);
      nvals.push_back(vals[i]);
      if (s < split.size() && split[s] == i) {
        npts.push_back(mids[s]);
        nvals.push_back(mvals[s]);
        ++s;
      }
    }
    pts.swap(npts);
    vals.swap(nvals);
  }
  out.collision = true;
  out.where = box.centre();
  return out;
}

// Contour count with seeded outward jitter of at most 1% of the smaller side.
int inflated_count(Evaluator& ev, const Box& box, const ZeroSearchConfig& cfg, Box* used) {
  Box current = box;
  cplx where{0};
  for (int attempt = 0; attempt <= 5; ++attempt) {
    if (attempt > 0) {
      Jitter jit(cfg.seed, box, attempt);
      const double d = 0.01 * box.min_side();
      current.re_min = box.re_min - d * (0.2 + 0.8 * jit.next());
      current.re_max = box.re_max + d * (0.2 + 0.8 * jit.next());
      current.im_min = box.im_min - d * (0.2 + 0.8 * jit.next());
      current.im_max = box.im_max + d * (0.2 + 0.8 * jit.next());
    }
    const ContourCount c = contour_count(ev, current, cfg);
    if (!c.collision) {
      if (used) *used = current;
      return c.count;
    }
    where = c.where;
  }
  throw BoundaryCollisionError("winding_count: zero of D0 on the boundary of " + format_box(box) + " near k = " +
                               format_k(where) + " after 5 jittered retries");
}

struct Moments {
  double count = 0;
  cplx centroid{0};
  double spread = 0;  // sqrt |mean (z - centroid)^2|
};

// Power sums of the zeros inside the circle |k - c| = radius by the trapezoid rule.
Moments circle_moments(Evaluator& ev, cplx c, double radius) {
  std::vector<cplx> ks(kCirclePoints);
  for (int j = 0; j < kCirclePoints; ++j) ks[j] = c + std::polar(radius, 2 * kPi * j / kCirclePoints);
  const std::vector<D0Pair> vals = ev.batch(ks);
  cplx s0 = 0, s1 = 0, s2 = 0;
  for (int j = 0; j < kCirclePoints; ++j) {
    const cplx w = (vals[j].derivative / vals[j].value).value() * (ks[j] - c);
    const cplx z = ks[j] - c;
    s0 += w;
    s1 += w * z;
    s2 += w * z * z;
  }
  s0 /= double(kCirclePoints);
  s1 /= double(kCirclePoints);
  s2 /= double(kCirclePoints);
  Moments m;
  m.count = s0.real();
  if (std::abs(s0) < 0.5) return m;
  const cplx mean = s1 / s0;
  m.centroid = c + mean;
  m.spread = std::sqrt(std::abs(s2 / s0 - mean * mean));
  return m;
}

struct NewtonOutcome {
  bool converged = false;
  bool escaped = false;
  cplx k{0};
  int iters = 0;
  D0Pair last;
  std::string trace;
};

NewtonOutcome newton(Evaluator& ev, cplx k, int multiplicity, const Box* box) {
  NewtonOutcome out;
  std::ostringstream trace;
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it <= 50; ++it) {
    const D0Pair p = ev.at(k);
    out.last = p;
    out.k = k;
    out.iters = it;
    trace << " " << format_k(k);
    if (p.value.is_zero()) {
      out.converged = true;
      break;
    }
    if (p.derivative.is_zero()) break;
    const cplx step = double(multiplicity) * (p.value / p.derivative).value();
    const double size = std::abs(step);
    const double scale = std::max(1.0, std::abs(k));
    // Below 1e-9 relative, a step that no longer halves means the noise floor was reached.
    if (size <= 1e-12 * scale || (it >= 2 && size <= 1e-9 * scale && size > 0.5 * prev)) {
      out.converged = true;
      break;
    }
    if (it == 50) break;
    prev = size;
    k -= step;
    if (box && !box->contains(k, 1e-9 * box->max_side())) {
      out.escaped = true;
      out.k = k;
      out.iters = it + 1;
      break;
    }
  }
  out.trace = trace.str();
  return out;
}

// Bisection on the sign of Re D0 along [a, b] of the real axis.
std::optional<double> real_bisection(Evaluator& ev, double a, double b) {
  double fa = ev.at(a).value.value().real();
  double fb = ev.at(b).value.value().real();
  if (fa == 0) return a;
  if (fb == 0) return b;
  if ((fa < 0) == (fb < 0)) return std::nullopt;
  for (int it = 0; it < 200 && b - a > 1e-14 * std::max(1.0, std::abs(a)); ++it) {
    const double m = 0.5 * (a + b);
    const ScaledComplex v = ev.at(m).value;
    // Compare signs through the mantissa so huge exponents do not overflow.
    const double fm = v.mantissa().real();
    if (fm == 0) return m;
    if ((fm < 0) == (fa < 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

ZeroRecord finish_record(Evaluator& ev, cplx k, int multiplicity, int iters, const Box& origin) {
  k = {k.real(), snap_imag(k.imag())};
  ZeroRecord r;
  r.k = k;
  r.multiplicity = multiplicity;
  r.newton_iters = iters;
  r.origin_box = origin;
  r.residual = normalized_abs(ev.at(k).value, k, ev.map().total_travel_time());
  return r;
}

std::optional<ZeroRecord> refine_in_box(Evaluator& ev, const Box& box, std::ostringstream& trace) {
  if (box.straddles_real_axis()) {
    NewtonOutcome n = newton(ev, cplx(box.centre().real(), 0.0), 1, &box);
    if (n.converged && box.contains(n.k)) return finish_record(ev, n.k, 1, n.iters, box);
    if (auto root = real_bisection(ev, box.re_min, box.re_max)) {
      NewtonOutcome polish = newton(ev, cplx(*root, 0.0), 1, &box);
      const cplx k = polish.converged && box.contains(polish.k) ? polish.k : cplx(*root, 0.0);
      return finish_record(ev, k, 1, n.iters + polish.iters, box);
    }
  }
  NewtonOutcome n = newton(ev, box.centre(), 1, &box);
  if (n.converged && box.contains(n.k)) return finish_record(ev, n.k, 1, n.iters, box);
  trace << " newton from centre of " << format_box(box) << (n.escaped ? " escaped" : " stalled") << ";";
  return std::nullopt;
}

// Moments on the circumscribed circle; a tight cluster is re-centred on a
// smaller circle and isolated by a square whose winding count fixes the multiplicity.
std::optional<ZeroRecord> probe_cluster(Evaluator& ev, const Box& box, int count, const ZeroSearchConfig& cfg) {
  const cplx c = box.centre();
  const double radius = 0.5 * std::hypot(box.width(), box.height()) * 1.05;
  const Moments m = circle_moments(ev, c, radius);
  if (std::abs(m.count - count) > 1e-2 || m.spread > cfg.cluster_size) return std::nullopt;
  const double rho = std::min(radius, 0.05);
  const Moments fine = circle_moments(ev, m.centroid, rho);
  if (std::abs(fine.count - count) > 1e-2) return std::nullopt;
  Box iso{fine.centroid.real() - rho, fine.centroid.real() + rho, fine.centroid.imag() - rho,
          fine.centroid.imag() + rho};
  // Keep the isolating square off any zero by nudging it with the seeded jitter.
  for (int attempt = 0; attempt < 6; ++attempt) {
    if (attempt > 0) {
      Jitter jit(cfg.seed, iso, attempt);
      const double d = 0.05 * rho;
      iso = Box{iso.re_min - d * jit.next(), iso.re_max + d * jit.next(), iso.im_min - d * jit.next(),
                iso.im_max + d * jit.next()};
    }
    const ContourCount w = contour_count(ev, iso, cfg);
    if (w.collision) continue;
    if (w.count != count) return std::nullopt;
    return finish_record(ev, fine.centroid, count, 0, iso);
  }
  return std::nullopt;
}

std::vector<Box> split_box(const Box& box, const ZeroSearchConfig& cfg, int attempt) {
  Jitter jit(cfg.seed, box, attempt);
  const bool along_re = box.width() >= box.height();
  const double aspect = box.max_side() / box.min_side();
  const int parts = std::max(2, static_cast<int>(std::ceil(aspect / 2)));
  const double lo = along_re ? box.re_min : box.im_min;
  const double len = box.max_side();
  std::vector<double> cuts{lo};
  for (int i = 1; i < parts; ++i) cuts.push_back(lo + len * (i + 0.2 * (jit.next() - 0.5)) / parts);
  cuts.push_back(along_re ? box.re_max : box.im_max);
  std::vector<Box> out;
  for (int i = 0; i < parts; ++i) {
    Box c = box;
    if (along_re) {
      c.re_min = cuts[i];
      c.re_max = cuts[i + 1];
    } else {
      c.im_min = cuts[i];
      c.im_max = cuts[i + 1];
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace

void Box::validate() const {
  if (!std::isfinite(re_min) || !std::isfinite(re_max) || !std::isfinite(im_min) || !std::isfinite(im_max) ||
      !(re_max > re_min) || !(im_max > im_min)) {
    throw DomainError("box " + format_box(*this) + " has an empty interior");
  }
}

int Spectrum::total_multiplicity() const {
  int total = 0;
  for (const auto& z : zeros) total += z.multiplicity;
  return total;
}

void ZeroSearchConfig::validate() const {
  integrator.validate();
  if (!(zero_tol > 0) || !(merge_tol > 0) || !(boundary_tol > 0) || !(boundary_tol < 0.1))
    throw DomainError("zero search: tolerances must be positive and boundary_tol < 0.1");
  if (!(cluster_size > 0)) throw DomainError("zero search: cluster_size must be positive");
  if (!(exclusion_radius >= 0)) throw DomainError("zero search: exclusion_radius must be >= 0");
  if (!(max_abs_imag > 0)) throw DomainError("zero search: max_abs_imag must be positive");
  if (max_evaluations < 100) throw DomainError("zero search: max_evaluations must be >= 100");
  if (workers < 1) throw DomainError("zero search: workers must be >= 1");
}

int winding_count(const LiouvilleMap& map, const Box& box, const ZeroSearchConfig& cfg, Box* used) {
  cfg.validate();
  box.validate();
  Evaluator ev(map, cfg);
  try {
    return inflated_count(ev, box, cfg, used);
  } catch (const BudgetExhausted&) {
    throw NumericalError("winding_count: evaluation budget exhausted on " + format_box(box));
  }
}

ZeroRecord refine(const LiouvilleMap& map, cplx k0, const ZeroSearchConfig& cfg, const Box* box, int multiplicity) {
  cfg.validate();
  if (multiplicity < 1) throw DomainError("refine: multiplicity must be >= 1");
  Evaluator ev(map, cfg);
  try {
    NewtonOutcome n = newton(ev, k0, multiplicity, box);
    if (n.converged) return finish_record(ev, n.k, multiplicity, n.iters, box ? *box : Box{});
    if (n.escaped && box && k0.imag() == 0) {
      if (auto root = real_bisection(ev, box->re_min, box->re_max)) {
        return finish_record(ev, cplx(*root, 0.0), multiplicity, n.iters, *box);
      }
    }
    throw NumericalError("refine: Newton " + std::string(n.escaped ? "left the box" : "did not converge") +
                         " from k0 = " + format_k(k0) + "; iterates:" + n.trace);
  } catch (const BudgetExhausted&) {
    throw NumericalError("refine: evaluation budget exhausted");
  }
}

Spectrum locate(const LiouvilleMap& map, const Box& region, const ZeroSearchConfig& cfg) {
  cfg.validate();
  region.validate();
  if (std::max(std::abs(region.im_min), std::abs(region.im_max)) > cfg.max_abs_imag) {
    std::ostringstream msg;
    msg << "locate: region " << format_box(region) << " exceeds |Im k| <= " << cfg.max_abs_imag;
    throw DomainError(msg.str());
  }
  require_nondegenerate(map, region.re_min, region.re_max, region.im_min, region.im_max, cfg.integrator);

  Spectrum sp;
  sp.region = region;
  sp.profile_fingerprint = fingerprint(map.profile());
  sp.travel_time = map.total_travel_time();
  Evaluator ev(map, cfg);
  std::vector<ZeroRecord> found;

  try {
    sp.region_winding = inflated_count(ev, region, cfg, &sp.region);

    struct Node {
      Box box;
      int count;
    };
    std::deque<Node> queue{{sp.region, sp.region_winding}};
    while (!queue.empty()) {
      const Node node = queue.front();
      queue.pop_front();
      if (node.count == 0) continue;
      if (node.count < 0) {
        sp.complete = false;
        sp.notes.push_back("negative winding count on " + format_box(node.box) + " (poles are impossible)");
        continue;
      }

      std::optional<ZeroRecord> rec;
      std::ostringstream trace;
      try {
        if (node.count == 1 && node.box.max_side() <= kNewtonBoxSize) {
          rec = refine_in_box(ev, node.box, trace);
        } else if (node.count >= 2 && node.box.max_side() <= kClusterBoxSize) {
          rec = probe_cluster(ev, node.box, node.count, cfg);
        }
      } catch (const NumericalError& e) {
        trace << " " << e.what();
      }
      if (rec) {
        if (rec->residual > cfg.zero_tol) {
          std::ostringstream note;
          note << "zero at " << format_k(rec->k) << " has residual " << rec->residual << " above zero_tol";
          sp.notes.push_back(note.str());
        }
        sp.leaf_winding_sum += node.count;
        if (std::abs(rec->k) < cfg.exclusion_radius) {
          sp.excluded_multiplicity += rec->multiplicity;
        } else {
          found.push_back(*rec);
        }
        continue;
      }

      if (node.box.max_side() < 1e-9 * std::max(1.0, std::abs(node.box.centre()))) {
        sp.complete = false;
        sp.leaf_winding_sum += node.count;
        sp.notes.push_back("unresolved box " + format_box(node.box) + " with count " +
                           std::to_string(node.count) + ":" + trace.str());
        continue;
      }

      std::vector<Box> children;
      std::vector<int> counts;
      bool accepted = false;
      for (int attempt = 0; attempt < 8 && !accepted; ++attempt) {
        children = split_box(node.box, cfg, attempt);
        counts.assign(children.size(), 0);
        bool collided = false;
        int sum = 0;
        for (std::size_t i = 0; i < children.size() && !collided; ++i) {
          const ContourCount c = contour_count(ev, children[i], cfg);
          collided = c.collision;
          counts[i] = c.count;
          sum += c.count;
        }
        if (collided) continue;
        if (sum != node.count) {
          std::ostringstream note;
          note << "children of " << format_box(node.box) << " count " << sum << " != " << node.count
               << " (attempt " << attempt << ")";
          sp.notes.push_back(note.str());
          continue;
        }
        accepted = true;
      }
      if (!accepted) {
        sp.complete = false;
        sp.leaf_winding_sum += node.count;
        sp.notes.push_back("could not subdivide " + format_box(node.box) + " consistently");
        continue;
      }
      for (std::size_t i = 0; i < children.size(); ++i) queue.push_back({children[i], counts[i]});
    }
  } catch (const BudgetExhausted&) {
    sp.complete = false;
    sp.notes.push_back("evaluation budget of " + std::to_string(cfg.max_evaluations) + " exhausted");
  }
  sp.evaluations = ev.evaluations();

  std::sort(found.begin(), found.end(), [](const ZeroRecord& a, const ZeroRecord& b) {
    return a.k.real() != b.k.real() ? a.k.real() < b.k.real() : a.k.imag() < b.k.imag();
  });
  for (const ZeroRecord& z : found) {
    auto dup = std::find_if(sp.zeros.begin(), sp.zeros.end(),
                            [&](const ZeroRecord& o) { return std::abs(o.k - z.k) <= cfg.merge_tol; });
    if (dup == sp.zeros.end()) {
      sp.zeros.push_back(z);
      continue;
    }
    sp.notes.push_back("merged duplicate zero at " + format_k(z.k));
    if (z.residual < dup->residual) *dup = z;
  }

  for (const ZeroRecord& z : sp.zeros) {
    if (z.k.imag() == 0 || !sp.region.contains(std::conj(z.k))) continue;
    const bool mirrored = std::any_of(sp.zeros.begin(), sp.zeros.end(), [&](const ZeroRecord& o) {
      return std::abs(o.k - std::conj(z.k)) <= std::max(cfg.merge_tol, 1e-9 * std::abs(z.k));
    });
    if (!mirrored) sp.notes.push_back("conjugate of " + format_k(z.k) + " missing from the spectrum");
  }
  return sp;
}

std::vector<Sector> canonical_sectors(double epsilon) {
  if (!(epsilon > 0 && epsilon < kPi / 2)) throw DomainError("canonical_sectors: epsilon must lie in (0, pi/2)");
  return {{-epsilon, epsilon}, {epsilon, kPi - epsilon}, {kPi - epsilon, kPi + epsilon},
          {kPi + epsilon, 2 * kPi - epsilon}};
}

DensityReport density(const Spectrum& spectrum, const std::vector<Sector>& sectors, const std::vector<double>& radii) {
  for (const Sector& s : sectors) {
    if (!(s.beta > s.alpha) || s.beta - s.alpha > 2 * kPi) throw DomainError("density: sector needs alpha < beta <= alpha + 2 pi");
  }
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0) || (i > 0 && !(radii[i] > radii[i - 1])))
      throw DomainError("density: radii must be positive and increasing");
  }
  DensityReport rep;
  rep.sectors = sectors;
  rep.radii = radii;

  std::vector<std::pair<cplx, int>> pts;
  for (const auto& z : spectrum.zeros) pts.emplace_back(z.k, z.multiplicity);
  // D0 is even in k, so a right-half-plane search determines the left half.
  if (spectrum.region.re_min >= 0 && !spectrum.zeros.empty()) {
    rep.mirrored = true;
    for (const auto& z : spectrum.zeros) pts.emplace_back(-z.k, z.multiplicity);
  }
  if (!spectrum.complete) rep.caveats.push_back("spectrum is incomplete; counts are lower bounds");

  const double b = spectrum.travel_time;
  for (const Sector& s : sectors) {
    std::vector<int> counts;
    std::vector<double> est;
    for (double r : radii) {
      int n = 0;
      for (const auto& [k, m] : pts) {
        if (std::abs(k) > r) continue;
        const double theta = s.alpha + std::fmod(std::arg(k) - s.alpha + 4 * kPi, 2 * kPi);
        if (theta > s.alpha && theta < s.beta) n += m;
      }
      counts.push_back(n);
      est.push_back(n / r);
    }
    rep.counts.push_back(counts);
    rep.estimates.push_back(est);

    auto inside = [&](double angle) {
      const double t = s.alpha + std::fmod(angle - s.alpha + 4 * kPi, 2 * kPi);
      return t > s.alpha && t < s.beta;
    };
    auto touches = [&](double angle) {
      const double t = s.alpha + std::fmod(angle - s.alpha + 4 * kPi, 2 * kPi);
      return t >= s.alpha && t <= s.beta;
    };
    const bool has0 = inside(0), haspi = inside(kPi);
    std::optional<double> target;
    if (has0 != haspi && s.beta - s.alpha < kPi) target = (1 + b) / kPi;
    if (!touches(0) && !touches(kPi)) target = 0.0;
    rep.targets.push_back(target);

    if (!radii.empty()) {
      // Points of the sector at the largest radius that lie outside the searched area.
      const double r = radii.back();
      const Box& reg = spectrum.region;
      bool covered = true;
      for (int i = 0; i <= 16 && covered; ++i) {
        for (double rr : {r, 0.5 * r, 0.1 * r}) {
          cplx k = std::polar(rr, s.alpha + (s.beta - s.alpha) * i / 16);
          if (rep.mirrored && k.real() < 0) k = -k;
          if (std::abs(k) < 0.1 + 1e-12) continue;
          if (!reg.contains(k, 1e-9)) {
            covered = false;
            break;
          }
        }
      }
      if (!covered) {
        std::ostringstream note;
        note << "sector (" << s.alpha << ", " << s.beta << ") extends beyond the searched region at r = " << r;
        rep.caveats.push_back(note.str());
      }
    }
  }
  return rep;
}

StripReport strip_report(const Spectrum& spectrum, double start, double length, double half_width) {
  if (!(length >= 0) || !(half_width > 0)) throw DomainError("strip_report: need length >= 0 and K > 0");
  StripReport rep;
  rep.start = start;
  rep.length = length;
  rep.half_width = half_width;
  const double b = spectrum.travel_time;
  rep.predicted = length * (1 + b) / kPi;
  rep.classified = std::abs(1 - b) > 1e-12;
  const double near_step = kPi / (1 + b);
  const double far_step = rep.classified ? kPi / std::abs(1 - b) : 0;
  for (const auto& z : spectrum.zeros) {
    const double x = z.k.real();
    if (x < start || x > start + length || std::abs(z.k.imag()) > half_width) continue;
    rep.total += z.multiplicity;
    if (!rep.classified) {
      rep.unclassified += z.multiplicity;
      continue;
    }
    const double d_near = std::abs(x - near_step * std::round(x / near_step));
    const double d_far = std::abs(x - far_step * std::round(x / far_step));
    if (std::abs(d_near - d_far) <= 1e-9 * std::max(1.0, std::abs(x))) {
      rep.unclassified += z.multiplicity;
    } else if (d_near < d_far) {
      rep.family_near += z.multiplicity;
    } else {
      rep.family_far += z.multiplicity;
    }
  }
  return rep;
}

double default_exclusion_radius(double travel_time) { return 3 * kPi / (1 + travel_time); }

SeparationResult separation(const Spectrum& spectrum, double exclusion_radius, double near_collision) {
  SeparationResult out;
  std::vector<const ZeroRecord*> kept;
  for (const auto& z : spectrum.zeros) {
    if (std::abs(z.k) <= exclusion_radius) continue;
    kept.push_back(&z);
    if (z.multiplicity > 1) out.non_simple.push_back(z.k);
  }
  out.considered = static_cast<int>(kept.size());
  if (kept.size() < 2) return out;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < kept.size(); ++i) {
    for (std::size_t j = i + 1; j < kept.size(); ++j) {
      const double d = std::abs(kept[i]->k - kept[j]->k);
      best = std::min(best, d);
      if (d < near_collision) out.violations.emplace_back(kept[i]->k, kept[j]->k);
    }
  }
  out.delta = 0.5 * best;
  return out;
}

}  // namespace ite
