#include "ite/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "ite/determinant.hpp"
#include "ite/errors.hpp"
#include "ite/quadrature.hpp"

namespace ite::cli {

using json = nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

// ---- config parsing ---------------------------------------------------------

void check_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  check_object(j, where);
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

void read(const json& j, const char* key, double& dst, const std::string& where) {
  if (!j.contains(key)) return;
  if (!j[key].is_number()) throw ConfigError(where + "." + key + ": expected a number");
  dst = j[key].get<double>();
}

void read(const json& j, const char* key, int& dst, const std::string& where) {
  if (!j.contains(key)) return;
  if (!j[key].is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
  dst = j[key].get<int>();
}

void read(const json& j, const char* key, long& dst, const std::string& where) {
  if (!j.contains(key)) return;
  if (!j[key].is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
  dst = j[key].get<long>();
}

void read(const json& j, const char* key, std::uint64_t& dst, const std::string& where) {
  if (!j.contains(key)) return;
  if (!j[key].is_number_unsigned() && !(j[key].is_number_integer() && j[key].get<long long>() >= 0))
    throw ConfigError(where + "." + key + ": expected a non-negative integer");
  dst = j[key].get<std::uint64_t>();
}

void read(const json& j, const char* key, bool& dst, const std::string& where) {
  if (!j.contains(key)) return;
  if (!j[key].is_boolean()) throw ConfigError(where + "." + key + ": expected true or false");
  dst = j[key].get<bool>();
}

void read(const json& j, const char* key, std::string& dst, const std::string& where) {
  if (!j.contains(key)) return;
  if (!j[key].is_string()) throw ConfigError(where + "." + key + ": expected a string");
  dst = j[key].get<std::string>();
}

void read(const json& j, const char* key, std::optional<double>& dst, const std::string& where) {
  if (!j.contains(key) || j[key].is_null()) return;
  double v = 0;
  read(j, key, v, where);
  dst = v;
}

void read(const json& j, const char* key, std::vector<double>& dst, const std::string& where) {
  if (!j.contains(key)) return;
  const json& a = j[key];
  if (!a.is_array()) throw ConfigError(where + "." + key + ": expected an array of numbers");
  dst.clear();
  for (const json& v : a) {
    if (!v.is_number()) throw ConfigError(where + "." + key + ": expected an array of numbers");
    dst.push_back(v.get<double>());
  }
}

void read(const json& j, const char* key, std::vector<std::size_t>& dst, const std::string& where) {
  if (!j.contains(key)) return;
  const json& a = j[key];
  if (!a.is_array()) throw ConfigError(where + "." + key + ": expected an array of positive integers");
  dst.clear();
  for (const json& v : a) {
    if (!v.is_number_unsigned() || v.get<std::size_t>() == 0)
      throw ConfigError(where + "." + key + ": expected an array of positive integers");
    dst.push_back(v.get<std::size_t>());
  }
}

void read(const json& j, const char* key, cplx& dst, const std::string& where) {
  if (!j.contains(key)) return;
  const json& a = j[key];
  if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number())
    throw ConfigError(where + "." + key + ": expected [re, im]");
  dst = {a[0].get<double>(), a[1].get<double>()};
}

RadialProfile::Spec parse_profile(const json& j) {
  check_object(j, "profile");
  if (!j.contains("kind") || !j["kind"].is_string()) throw ConfigError("profile.kind: expected a string");
  const std::string kind = j["kind"];
  if (kind == "constant") {
    check_keys(j, {"kind", "n0"}, "profile");
    ConstantIndex c;
    read(j, "n0", c.n0, "profile");
    return c;
  }
  if (kind == "smooth_bump") {
    check_keys(j, {"kind", "amplitude", "power"}, "profile");
    SmoothBump b;
    read(j, "amplitude", b.amplitude, "profile");
    read(j, "power", b.power, "profile");
    return b;
  }
  if (kind == "spline") {
    check_keys(j, {"kind", "r", "n"}, "profile");
    SplineGrid s;
    read(j, "r", s.r, "profile");
    read(j, "n", s.n, "profile");
    return s;
  }
  throw ConfigError("profile.kind: unknown kind '" + kind + "' (constant, smooth_bump, spline)");
}

json number_list(const std::vector<double>& v) { return json(v); }

json box_json(const Box& b) { return {b.re_min, b.re_max, b.im_min, b.im_max}; }

json cplx_json(cplx k) { return {{"re", k.real()}, {"im", k.imag()}}; }

json scaled_json(const ScaledComplex& v) {
  return {{"mantissa", {v.mantissa().real(), v.mantissa().imag()}},
          {"exponent", v.exponent()},
          {"log_abs", v.is_zero() ? json(nullptr) : json(v.log_abs())},
          {"arg", v.arg()}};
}

// ---- shared run state ---------------------------------------------------------

int resolve_workers(int from_flag, int from_config) {
  if (from_flag > 0) return from_flag;
  if (from_config > 0) return from_config;
  if (const char* env = std::getenv("ITE_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1 || v > 1024) throw ConfigError("ITE_WORKERS must be an integer in [1, 1024]");
    return static_cast<int>(v);
  }
  return 1;
}

struct Context {
  RunConfig cfg;
  LiouvilleMap map;
  std::string command;
  bool timestamp = false;

  double b() const { return map.total_travel_time(); }
  void require_nondegenerate() const {
    ite::require_nondegenerate(map, cfg.search.re_min, cfg.search.re_max, cfg.search.im_min, cfg.search.im_max,
                               cfg.integrator);
  }
  Spectrum spectrum() const { return locate(map, cfg.search, cfg.zero_search()); }
};

json envelope(const Context& ctx, json results) {
  json env;
  env["tool"] = "itesolve";
  env["version"] = kToolVersion;
  env["command"] = ctx.command;
  env["config"] = to_json(ctx.cfg);
  env["profile"] = {{"canonical", ctx.map.profile().canonical()},
                    {"fingerprint", fingerprint(ctx.map.profile())},
                    {"travel_time", ctx.b()},
                    {"warnings", ctx.map.profile().warnings()}};
  if (ctx.timestamp) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    env["timestamp"] = buf;
  }
  env["results"] = std::move(results);
  return env;
}

json spectrum_json(const Spectrum& sp) {
  json zeros = json::array();
  for (const auto& z : sp.zeros) {
    zeros.push_back({{"re", z.k.real()},
                     {"im", z.k.imag()},
                     {"residual", z.residual},
                     {"multiplicity", z.multiplicity},
                     {"newton_iters", z.newton_iters},
                     {"origin_box", box_json(z.origin_box)}});
  }
  return {{"region", box_json(sp.region)},
          {"region_winding", sp.region_winding},
          {"leaf_winding_sum", sp.leaf_winding_sum},
          {"excluded_multiplicity", sp.excluded_multiplicity},
          {"total_multiplicity", sp.total_multiplicity()},
          {"complete", sp.complete},
          {"evaluations", sp.evaluations},
          {"notes", sp.notes},
          {"zeros", zeros}};
}

json separation_json(const SeparationResult& s, double exclusion) {
  json v = json::array();
  for (const auto& [a, b] : s.violations) v.push_back({cplx_json(a), cplx_json(b)});
  json ns = json::array();
  for (cplx k : s.non_simple) ns.push_back(cplx_json(k));
  return {{"exclusion_radius", exclusion},
          {"considered", s.considered},
          {"delta", s.delta ? json(*s.delta) : json(nullptr)},
          {"violations", v},
          {"non_simple", ns}};
}

std::string format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw ConfigError("failed writing '" + path + "'");
}

double exclusion_radius(const Context& ctx) {
  return ctx.cfg.separation.exclusion_radius.value_or(default_exclusion_radius(ctx.b()));
}

// ---- commands -------------------------------------------------------------------

json cmd_eval(const Context& ctx) {
  ctx.require_nondegenerate();
  const cplx k = ctx.cfg.eval.k;
  const D0Pair p = d0_with_derivative(ctx.map.profile(), k, ctx.cfg.integrator);
  json res{{"k", cplx_json(k)},
           {"d0", scaled_json(p.value)},
           {"d0_derivative", scaled_json(p.derivative)},
           {"normalized_abs", normalized_abs(p.value, k, ctx.b())}};
  json models;
  for (auto mode : {AsymptoticModel::Mode::reduced, AsymptoticModel::Mode::full}) {
    const char* name = mode == AsymptoticModel::Mode::reduced ? "reduced" : "full";
    try {
      const ScaledComplex m = d0_asymptotic(AsymptoticModel::from_map(ctx.map, mode), k);
      models[name] = {{"value", scaled_json(m)}, {"relative_gap", relative_difference(m, p.value)}};
    } catch (const DomainError& e) {
      models[name] = {{"value", nullptr}, {"reason", e.what()}};
    }
  }
  res["asymptotic"] = models;
  return res;
}

json cmd_spectrum(const Context& ctx) {
  const Spectrum sp = ctx.spectrum();
  if (!ctx.cfg.csv_path.empty()) {
    std::string csv = "re,im,residual,multiplicity\n";
    for (const auto& z : sp.zeros) {
      csv += format17(z.k.real()) + "," + format17(z.k.imag()) + "," + format17(z.residual) + "," +
             std::to_string(z.multiplicity) + "\n";
    }
    write_text(ctx.cfg.csv_path, csv);
  }
  const double excl = exclusion_radius(ctx);
  return {{"spectrum", spectrum_json(sp)},
          {"separation", separation_json(separation(sp, excl, ctx.cfg.separation.near_collision), excl)}};
}

json cmd_density(const Context& ctx) {
  const Spectrum sp = ctx.spectrum();
  const DensityReport rep = density(sp, canonical_sectors(ctx.cfg.density.epsilon), ctx.cfg.density.radii);
  json sectors = json::array();
  for (std::size_t i = 0; i < rep.sectors.size(); ++i) {
    sectors.push_back({{"alpha", rep.sectors[i].alpha},
                       {"beta", rep.sectors[i].beta},
                       {"counts", rep.counts[i]},
                       {"estimates", rep.estimates[i]},
                       {"target", rep.targets[i] ? json(*rep.targets[i]) : json(nullptr)}});
  }
  return {{"order", rep.order},
          {"radii", rep.radii},
          {"mirrored", rep.mirrored},
          {"sectors", sectors},
          {"caveats", rep.caveats},
          {"spectrum_complete", sp.complete}};
}

json cmd_strips(const Context& ctx) {
  const Spectrum sp = ctx.spectrum();
  const auto& s = ctx.cfg.strips;
  const StripReport rep = strip_report(sp, s.start, s.length, s.half_width);
  return {{"start", rep.start},
          {"length", rep.length},
          {"half_width", rep.half_width},
          {"total", rep.total},
          {"predicted", rep.predicted},
          {"classified", rep.classified},
          {"family_near", rep.family_near},
          {"family_far", rep.family_far},
          {"unclassified", rep.unclassified},
          {"spectrum_complete", sp.complete}};
}

json cmd_indicator(const Context& ctx) {
  ctx.require_nondegenerate();
  json rays = json::array();
  for (double theta : ctx.cfg.indicator.thetas) {
    const IndicatorReport r =
        indicator_estimate(ctx.map, theta, ctx.cfg.indicator.radii, ctx.cfg.integrator, ctx.cfg.indicator.max_radius);
    rays.push_back({{"theta", r.theta},
                    {"radii", r.radii},
                    {"raw", r.raw},
                    {"extrapolated", r.extrapolated},
                    {"slope", r.slope},
                    {"target", r.target},
                    {"relative_error", std::abs(r.extrapolated - r.target) / r.target},
                    {"notes", r.notes}});
  }
  const auto& hz = ctx.cfg.horizontal;
  const double h = hz.h.value_or(2.5 * kPi / (1 + ctx.b()));
  json lines = json::array();
  for (double hh : {h, -h}) {
    const HorizontalBounds hb = horizontal_bounds(ctx.map, hh, hz.x_min, hz.x_max, hz.samples, ctx.cfg.integrator);
    lines.push_back({{"h", hb.h},
                     {"x_min", hb.x_min},
                     {"x_max", hb.x_max},
                     {"samples", hb.samples},
                     {"min_abs", hb.min_abs},
                     {"max_abs", hb.max_abs},
                     {"near_zero", hb.near_zero}});
  }
  return {{"rays", rays}, {"horizontal", lines}};
}

json completeness_json(const CompletenessReport& c) {
  return {{"radii", c.radii},
          {"counts", c.counts},
          {"distinct_counts", c.distinct_counts},
          {"estimates", c.estimates},
          {"target", c.target}};
}

json cmd_basis(const Context& ctx) {
  const Spectrum sp = ctx.spectrum();
  const ExponentialSystem sys = build_system(sp, ctx.b());
  const FrameReport fr = frame_bounds(sys, ctx.cfg.basis.n, ctx.cfg.workers);
  json entries = json::array();
  for (const auto& e : fr.entries) {
    entries.push_back({{"n", e.n},
                       {"lambda_min", e.lambda_min},
                       {"lambda_max", e.lambda_max},
                       {"condition", std::isfinite(e.condition) ? json(e.condition) : json(nullptr)},
                       {"eigen_residual", e.eigen_residual}});
  }
  return {{"half_length", sys.half_length},
          {"nodes", sys.size()},
          {"warnings", sys.warnings},
          {"frame", {{"entries", entries},
                     {"lower_bounded", fr.lower_bounded},
                     {"upper_bounded", fr.upper_bounded},
                     {"positive_semidefinite", fr.positive_semidefinite}}},
          {"completeness", completeness_json(completeness_density(sys, ctx.cfg.basis.completeness_radii))}};
}

std::vector<cplx> read_samples(const std::string& path, const QuadratureGrid& grid) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open samples file '" + path + "'");
  std::string line;
  if (!std::getline(f, line) || line != "r,re_f,im_f") throw ConfigError(path + ": expected header r,re_f,im_f");
  std::vector<cplx> values;
  std::size_t row = 0;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    double r = 0, re = 0, im = 0;
    char tail = 0;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf%c", &r, &re, &im, &tail) != 3)
      throw ConfigError(path + ": malformed row " + std::to_string(row + 2));
    if (row >= grid.r.size() || std::abs(r - grid.r[row]) > 1e-12 * grid.half_length) {
      throw ConfigError(path + ": row " + std::to_string(row + 2) +
                        " is not on the expected grid (emit one with the grid subcommand)");
    }
    values.emplace_back(re, im);
    ++row;
  }
  if (values.size() != grid.r.size()) {
    throw ConfigError(path + ": " + std::to_string(values.size()) + " samples, grid has " +
                      std::to_string(grid.r.size()));
  }
  return values;
}

json cmd_expand(const Context& ctx, const std::string& samples_path) {
  if (samples_path.empty()) throw ConfigError("expand: --samples is required");
  const QuadratureGrid grid = sample_grid(ctx.cfg, ctx.b());
  const std::vector<cplx> f = read_samples(samples_path, grid);
  const Spectrum sp = ctx.spectrum();
  const ExponentialSystem sys = build_system(sp, ctx.b());
  json runs = json::array();
  for (std::size_t n : ctx.cfg.basis.n) {
    const ExpansionResult r = expand(grid, f, sys, n, ctx.cfg.basis.normalize, ctx.cfg.workers);
    json coeffs = json::array();
    for (Eigen::Index j = 0; j < r.coefficients.size(); ++j) coeffs.push_back(cplx_json(r.coefficients(j)));
    runs.push_back({{"n", r.n},
                    {"residual", r.residual},
                    {"quadrature_error", r.quadrature_error},
                    {"refinement_steps", r.refinement_steps},
                    {"normalized", r.normalized},
                    {"coefficients", coeffs}});
  }
  return {{"grid", {{"panels", grid.panels}, {"order", grid.order}, {"points", grid.r.size()}}},
          {"warnings", sys.warnings},
          {"expansions", runs}};
}

std::string cmd_grid(const Context& ctx, const std::string& fill) {
  const QuadratureGrid grid = sample_grid(ctx.cfg, ctx.b());
  std::string csv = "r,re_f,im_f\n";
  for (double r : grid.r) {
    double v = 0;
    if (fill == "cos") {
      v = std::cos(kPi * r / (2 * grid.half_length));
    } else if (fill != "zero") {
      throw ConfigError("grid: --fill must be zero or cos");
    }
    csv += format17(r) + "," + format17(v) + ",0\n";
  }
  return csv;
}

// ---- validate ------------------------------------------------------------------

struct Check {
  std::string name;
  std::string status;  // pass, fail, skip
  std::string detail;
};

cplx constant4_closed_form(cplx k) {
  return std::sin(k) * std::cos(2.0 * k) / k - std::cos(k) * std::sin(2.0 * k) / (2.0 * k);
}

json cmd_validate(const Context& ctx, int& failures) {
  std::vector<Check> checks;
  auto add = [&](std::string name, bool ok, std::string detail) {
    checks.push_back({std::move(name), ok ? "pass" : "fail", std::move(detail)});
  };
  auto skip = [&](std::string name, std::string why) { checks.push_back({std::move(name), "skip", std::move(why)}); };
  auto run_check = [&](const std::string& name, const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& e) {
      add(name, false, std::string("raised: ") + e.what());
    }
  };
  std::ostringstream d;
  auto detail = [&d]() {
    std::string s = d.str();
    d.str("");
    return s;
  };
  const auto& icfg = ctx.cfg.integrator;
  const RadialProfile& prof = ctx.map.profile();
  const bool constant = prof.is_constant();

  run_check("closed_form_constant_index", [&] {
    const RadialProfile four = RadialProfile::constant(4);
    double worst = 0;
    for (int i = 0; i < 24; ++i) {
      const cplx k(0.5 + 59.5 * std::fmod(0.618033988749895 * (i + 1), 1.0), -5 + 10 * std::fmod(0.7548776662 * (i + 1), 1.0));
      const cplx c = constant4_closed_form(k);
      worst = std::max(worst, std::abs(d0(four, k, icfg).value() - c) / std::abs(c));
    }
    d << "max relative error " << worst << " (limit 1e-9)";
    add("closed_form_constant_index", worst <= 1e-9, detail());
  });

  run_check("evenness_and_conjugation", [&] {
    double worst = 0;
    for (cplx k : {cplx(3.3, 0.4), cplx(11.7, -2.1), cplx(27.1, 3.9), cplx(0.9, 1.3)}) {
      const ScaledComplex v = d0(prof, k, icfg);
      worst = std::max(worst, relative_difference(v, d0(prof, -k, icfg)));
      worst = std::max(worst, relative_difference(v.conj(), d0(prof, std::conj(k), icfg)));
    }
    d << "max relative asymmetry " << worst << " (limit 1e-9)";
    add("evenness_and_conjugation", worst <= 1e-9, detail());
  });

  run_check("derivative_vs_finite_difference", [&] {
    double worst = 0;
    for (cplx k : {cplx(2.2, 0.3), cplx(13.4, -1.7), cplx(31.0, 2.5)}) {
      const double h = 1e-5 * std::abs(k);
      const cplx fd = ((d0(prof, k + h, icfg) - d0(prof, k - h, icfg)) / ScaledComplex(2 * h)).value();
      const cplx an = d0_derivative(prof, k, icfg).value();
      worst = std::max(worst, std::abs(fd - an) / std::abs(an));
    }
    d << "max relative gap " << worst << " (limit 1e-6)";
    add("derivative_vs_finite_difference", worst <= 1e-6, detail());
  });

  if (constant) {
    skip("reduced_model_convergence", "constant index has n(1) != 1, outside the asymptotic model's assumptions");
  } else {
    run_check("reduced_model_convergence", [&] {
      const ModelDeviation a = reduced_model_deviation(ctx.map, 20, 2, kPi, 33, icfg);
      const ModelDeviation b = reduced_model_deviation(ctx.map, 40, 2, kPi, 33, icfg);
      d << "deviation " << a.deviation << " at Re k = 20, " << b.deviation << " at 40 (ratio "
        << a.deviation / b.deviation << ", need >= 1.8)";
      add("reduced_model_convergence", a.deviation >= 1.8 * b.deviation, detail());
    });
  }

  std::optional<Spectrum> sp;
  run_check("argument_principle_consistency", [&] {
    sp = ctx.spectrum();
    const int total = sp->total_multiplicity() + sp->excluded_multiplicity;
    bool residuals = true;
    for (const auto& z : sp->zeros) residuals = residuals && z.residual <= ctx.cfg.zeros.zero_tol;
    d << "region " << sp->region_winding << ", leaves " << sp->leaf_winding_sum << ", multiplicities " << total
      << ", complete " << sp->complete << ", residuals within zero_tol " << residuals;
    add("argument_principle_consistency",
        sp->complete && residuals && sp->leaf_winding_sum == sp->region_winding && total == sp->region_winding,
        detail());
  });

  const Box& box = ctx.cfg.search;
  const double height = std::max(std::abs(box.im_min), std::abs(box.im_max));
  if (!sp || 2 * height > ctx.cfg.zeros.max_abs_imag) {
    skip("strip_confinement", "doubled search height would exceed max_abs_imag or no spectrum");
  } else {
    run_check("strip_confinement", [&] {
      Box tall = box;
      tall.im_min *= 2;
      tall.im_max *= 2;
      const Spectrum wide = locate(ctx.map, tall, ctx.cfg.zero_search());
      const double lo = std::max(5.0, box.re_min), hi = std::min(60.0, box.re_max);
      auto count = [&](const Spectrum& s) {
        int n = 0;
        for (const auto& z : s.zeros)
          if (z.k.real() >= lo && z.k.real() <= hi) n += z.multiplicity;
        return n;
      };
      d << count(*sp) << " zeros with Re k in [" << lo << ", " << hi << "] at the configured height, " << count(wide)
        << " at double height";
      add("strip_confinement", wide.complete && count(wide) == count(*sp), detail());
    });
  }

  if (constant) {
    skip("separation_and_simplicity", "constant index has n(1) != 1; its zeros are not eventually simple");
  } else if (!sp) {
    skip("separation_and_simplicity", "no spectrum");
  } else {
    const double excl = exclusion_radius(ctx);
    const SeparationResult s = separation(*sp, excl, ctx.cfg.separation.near_collision);
    d << "delta " << (s.delta ? *s.delta : 0.0) << ", violations " << s.violations.size() << ", non-simple "
      << s.non_simple.size() << " beyond radius " << excl;
    add("separation_and_simplicity", s.delta && *s.delta > 0 && s.violations.empty() && s.non_simple.empty(),
        detail());
  }

  run_check("indicator_imaginary_axis", [&] {
    const IndicatorReport r = indicator_estimate(ctx.map, kPi / 2, ctx.cfg.indicator.radii, icfg,
                                                 ctx.cfg.indicator.max_radius);
    const double err = std::abs(r.extrapolated - r.target) / r.target;
    d << "h(pi/2) = " << r.extrapolated << " vs " << r.target << " (relative error " << err << ", limit 0.05)";
    add("indicator_imaginary_axis", err <= 0.05, detail());
  });

  if (!sp || sp->zeros.empty()) {
    skip("gram_matrix", "no zeros to build a system from");
  } else {
    run_check("gram_matrix", [&] {
      const ExponentialSystem sys = build_system(*sp, ctx.b());
      const std::size_t n = std::min<std::size_t>(40, sys.size());
      const Eigen::MatrixXcd g = gram(sys, n, ctx.cfg.workers);
      const bool hermitian = g == g.adjoint();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g, Eigen::EigenvaluesOnly);
      const double floor = -1e-10 * g.trace().real() / n;
      // Quadrature oracle on the first few entries.
      const std::size_t m = std::min<std::size_t>(8, sys.size());
      double worst = 0;
      for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t l = 0; l < m; ++l) {
          const cplx kj = sys.nodes[j], kl = sys.nodes[l];
          auto integrand = [&](double r) { return std::exp(cplx(0, 1) * kj * r) * std::conj(std::exp(cplx(0, 1) * kl * r)); };
          const double scale = std::sqrt(std::abs(g(j, j)) * std::abs(g(l, l)));
          const auto q = quad::integrate_adaptive<cplx>(integrand, -sys.half_length, sys.half_length, 1e-13 * scale);
          worst = std::max(worst, std::abs(q.value - g(j, l)) / scale);
        }
      }
      d << "N = " << n << ", Hermitian " << hermitian << ", lambda_min " << es.eigenvalues()(0)
        << ", quadrature gap " << worst << " (limit 1e-10)";
      add("gram_matrix", hermitian && es.eigenvalues()(0) >= floor && worst <= 1e-10, detail());
    });
  }

  json items = json::array();
  failures = 0;
  for (const Check& c : checks) {
    if (c.status == "fail") ++failures;
    items.push_back({{"name", c.name}, {"status", c.status}, {"detail", c.detail}});
  }
  return {{"items", items}, {"failures", failures}, {"summary", failures == 0 ? "pass" : "fail"}};
}

}  // namespace

// ---- config API ------------------------------------------------------------------

ZeroSearchConfig RunConfig::zero_search() const {
  ZeroSearchConfig z = zeros;
  z.integrator = integrator;
  z.seed = seed;
  z.workers = std::max(1, workers);
  return z;
}

RunConfig parse_config(const json& doc) {
  RunConfig c;
  check_keys(doc, {"profile", "integrator", "quad_tol", "search", "zeros", "eval", "density", "strips", "separation",
                   "indicator", "horizontal", "basis", "workers", "seed", "output"},
             "config");
  if (doc.contains("profile")) c.profile = parse_profile(doc["profile"]);
  if (doc.contains("integrator")) {
    const json& j = doc["integrator"];
    check_keys(j, {"rel_tol", "abs_tol", "max_steps", "renorm_threshold"}, "integrator");
    read(j, "rel_tol", c.integrator.rel_tol, "integrator");
    read(j, "abs_tol", c.integrator.abs_tol, "integrator");
    read(j, "max_steps", c.integrator.max_steps, "integrator");
    read(j, "renorm_threshold", c.integrator.renorm_threshold, "integrator");
  }
  read(doc, "quad_tol", c.quad_tol, "config");
  if (doc.contains("search")) {
    const json& j = doc["search"];
    check_keys(j, {"re_min", "re_max", "im_min", "im_max"}, "search");
    read(j, "re_min", c.search.re_min, "search");
    read(j, "re_max", c.search.re_max, "search");
    read(j, "im_min", c.search.im_min, "search");
    read(j, "im_max", c.search.im_max, "search");
  }
  if (doc.contains("zeros")) {
    const json& j = doc["zeros"];
    check_keys(j, {"zero_tol", "merge_tol", "boundary_tol", "cluster_size", "exclusion_radius", "max_abs_imag",
                   "max_evaluations"},
               "zeros");
    read(j, "zero_tol", c.zeros.zero_tol, "zeros");
    read(j, "merge_tol", c.zeros.merge_tol, "zeros");
    read(j, "boundary_tol", c.zeros.boundary_tol, "zeros");
    read(j, "cluster_size", c.zeros.cluster_size, "zeros");
    read(j, "exclusion_radius", c.zeros.exclusion_radius, "zeros");
    read(j, "max_abs_imag", c.zeros.max_abs_imag, "zeros");
    read(j, "max_evaluations", c.zeros.max_evaluations, "zeros");
  }
  if (doc.contains("eval")) {
    check_keys(doc["eval"], {"k"}, "eval");
    read(doc["eval"], "k", c.eval.k, "eval");
  }
  if (doc.contains("density")) {
    const json& j = doc["density"];
    check_keys(j, {"epsilon", "radii"}, "density");
    read(j, "epsilon", c.density.epsilon, "density");
    read(j, "radii", c.density.radii, "density");
  }
  if (doc.contains("strips")) {
    const json& j = doc["strips"];
    check_keys(j, {"start", "length", "half_width"}, "strips");
    read(j, "start", c.strips.start, "strips");
    read(j, "length", c.strips.length, "strips");
    read(j, "half_width", c.strips.half_width, "strips");
  }
  if (doc.contains("separation")) {
    const json& j = doc["separation"];
    check_keys(j, {"exclusion_radius", "near_collision"}, "separation");
    read(j, "exclusion_radius", c.separation.exclusion_radius, "separation");
    read(j, "near_collision", c.separation.near_collision, "separation");
  }
  if (doc.contains("indicator")) {
    const json& j = doc["indicator"];
    check_keys(j, {"thetas", "radii", "max_radius"}, "indicator");
    read(j, "thetas", c.indicator.thetas, "indicator");
    read(j, "radii", c.indicator.radii, "indicator");
    read(j, "max_radius", c.indicator.max_radius, "indicator");
  }
  if (doc.contains("horizontal")) {
    const json& j = doc["horizontal"];
    check_keys(j, {"h", "x_min", "x_max", "samples"}, "horizontal");
    read(j, "h", c.horizontal.h, "horizontal");
    read(j, "x_min", c.horizontal.x_min, "horizontal");
    read(j, "x_max", c.horizontal.x_max, "horizontal");
    read(j, "samples", c.horizontal.samples, "horizontal");
  }
  if (doc.contains("basis")) {
    const json& j = doc["basis"];
    check_keys(j, {"n", "normalize", "completeness_radii", "panels", "order"}, "basis");
    read(j, "n", c.basis.n, "basis");
    read(j, "normalize", c.basis.normalize, "basis");
    read(j, "completeness_radii", c.basis.completeness_radii, "basis");
    read(j, "panels", c.basis.panels, "basis");
    read(j, "order", c.basis.order, "basis");
  }
  read(doc, "workers", c.workers, "config");
  read(doc, "seed", c.seed, "config");
  if (doc.contains("output")) {
    const json& j = doc["output"];
    check_keys(j, {"report", "csv"}, "output");
    read(j, "report", c.report_path, "output");
    read(j, "csv", c.csv_path, "output");
  }

  // Value checks; library validators raise DomainError.
  try {
    RadialProfile probe(c.profile);
    c.integrator.validate();
    c.search.validate();
    c.zero_search().validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (!(c.quad_tol > 0)) throw ConfigError("quad_tol must be positive");
  if (c.workers < 0) throw ConfigError("workers must be >= 1 (or 0 for the environment default)");
  if (!(c.density.epsilon > 0 && c.density.epsilon < kPi / 2)) throw ConfigError("density.epsilon must lie in (0, pi/2)");
  if (!(c.strips.length >= 0) || !(c.strips.half_width > 0)) throw ConfigError("strips: need length >= 0 and half_width > 0");
  if (!(c.separation.near_collision > 0)) throw ConfigError("separation.near_collision must be positive");
  if (c.separation.exclusion_radius && !(*c.separation.exclusion_radius >= 0))
    throw ConfigError("separation.exclusion_radius must be >= 0");
  if (c.horizontal.samples < 2 || !(c.horizontal.x_max > c.horizontal.x_min))
    throw ConfigError("horizontal: need x_max > x_min and samples >= 2");
  if (c.basis.n.empty()) throw ConfigError("basis.n must not be empty");
  if (c.basis.panels < 0 || c.basis.order < 2 || c.basis.order > 64)
    throw ConfigError("basis: panels must be >= 0 and order in [2, 64]");
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config '" + path + "'");
  json doc;
  try {
    doc = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_config(doc);
}

json profile_to_json(const RadialProfile::Spec& spec) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ConstantIndex>) {
          return {{"kind", "constant"}, {"n0", s.n0}};
        } else if constexpr (std::is_same_v<T, SmoothBump>) {
          return {{"kind", "smooth_bump"}, {"amplitude", s.amplitude}, {"power", s.power}};
        } else {
          return {{"kind", "spline"}, {"r", s.r}, {"n", s.n}};
        }
      },
      spec);
}

json to_json(const RunConfig& c) {
  json j;
  j["profile"] = profile_to_json(c.profile);
  j["integrator"] = {{"rel_tol", c.integrator.rel_tol},
                     {"abs_tol", c.integrator.abs_tol},
                     {"max_steps", c.integrator.max_steps},
                     {"renorm_threshold", c.integrator.renorm_threshold}};
  j["quad_tol"] = c.quad_tol;
  j["search"] = {{"re_min", c.search.re_min}, {"re_max", c.search.re_max}, {"im_min", c.search.im_min},
                 {"im_max", c.search.im_max}};
  j["zeros"] = {{"zero_tol", c.zeros.zero_tol},
                {"merge_tol", c.zeros.merge_tol},
                {"boundary_tol", c.zeros.boundary_tol},
                {"cluster_size", c.zeros.cluster_size},
                {"exclusion_radius", c.zeros.exclusion_radius},
                {"max_abs_imag", c.zeros.max_abs_imag},
                {"max_evaluations", c.zeros.max_evaluations}};
  j["eval"] = {{"k", {c.eval.k.real(), c.eval.k.imag()}}};
  j["density"] = {{"epsilon", c.density.epsilon}, {"radii", number_list(c.density.radii)}};
  j["strips"] = {{"start", c.strips.start}, {"length", c.strips.length}, {"half_width", c.strips.half_width}};
  j["separation"] = {
      {"exclusion_radius", c.separation.exclusion_radius ? json(*c.separation.exclusion_radius) : json(nullptr)},
      {"near_collision", c.separation.near_collision}};
  j["indicator"] = {{"thetas", c.indicator.thetas}, {"radii", c.indicator.radii}, {"max_radius", c.indicator.max_radius}};
  j["horizontal"] = {{"h", c.horizontal.h ? json(*c.horizontal.h) : json(nullptr)},
                     {"x_min", c.horizontal.x_min},
                     {"x_max", c.horizontal.x_max},
                     {"samples", c.horizontal.samples}};
  j["basis"] = {{"n", c.basis.n},
                {"normalize", c.basis.normalize},
                {"completeness_radii", c.basis.completeness_radii},
                {"panels", c.basis.panels},
                {"order", c.basis.order}};
  j["workers"] = c.workers;
  j["seed"] = c.seed;
  j["output"] = {{"report", c.report_path}, {"csv", c.csv_path}};
  return j;
}

QuadratureGrid sample_grid(const RunConfig& cfg, double travel_time) {
  const double a = 1 + travel_time;
  int panels = cfg.basis.panels;
  if (panels == 0) {
    const double freq = std::max(1.0, std::max(std::abs(cfg.search.re_max), std::abs(cfg.search.re_min)));
    panels = std::max(1, static_cast<int>(std::ceil(16 * freq / (2 * kPi) * 2 * a / cfg.basis.order)));
  }
  return QuadratureGrid::make(a, panels, cfg.basis.order);
}

// ---- entry point -------------------------------------------------------------------

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Interior transmission eigenvalues of radially symmetric media", "itesolve"};
  app.require_subcommand(1);
  std::string config_path, report_path, csv_path, samples_path, fill = "zero";
  int workers = 0;
  std::optional<std::uint64_t> seed;
  std::vector<double> region, k;
  bool timestamp = false;
  app.add_option("-c,--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("-o,--out", report_path, "Report path (default stdout)");
  app.add_option("-w,--workers", workers, "Worker threads (overrides the config and ITE_WORKERS)")
      ->check(CLI::Range(1, 1024));
  app.add_option("--seed", seed, "Seed for boundary jitter");
  app.add_option("--region", region, "Search box re_min re_max im_min im_max")->expected(4);
  app.add_flag("--timestamp", timestamp, "Add a UTC timestamp to the report envelope");

  auto* eval = app.add_subcommand("eval", "D0, its derivative and the asymptotic models at one k");
  eval->add_option("--k", k, "k as re im")->expected(2);
  auto* spectrum = app.add_subcommand("spectrum", "Zeros of D0 in the search box");
  spectrum->add_option("--csv", csv_path, "Also write re,im,residual,multiplicity CSV here");
  app.add_subcommand("density", "Sector counting functions");
  app.add_subcommand("strips", "Strip count against s(1+B)/pi with family classification");
  app.add_subcommand("indicator", "Directional growth and horizontal-line bounds");
  app.add_subcommand("basis", "Gram-matrix frame bounds and completeness density");
  auto* expand_cmd = app.add_subcommand("expand", "Expand sampled f in the exponential system");
  expand_cmd->add_option("--samples", samples_path, "CSV r,re_f,im_f on the grid from 'grid'")->required();
  auto* grid_cmd = app.add_subcommand("grid", "Emit the sample grid expected by 'expand'");
  grid_cmd->add_option("--fill", fill, "Values to write: zero or cos");
  grid_cmd->add_option("--csv", csv_path, "Output path (default stdout)");
  app.add_subcommand("validate", "Run the invariant suite");
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    RunConfig cfg = config_path.empty() ? parse_config(json::object()) : load_config(config_path);
    if (!report_path.empty()) cfg.report_path = report_path;
    if (!csv_path.empty()) cfg.csv_path = csv_path;
    if (seed) cfg.seed = *seed;
    if (!region.empty()) {
      cfg.search = Box{region[0], region[1], region[2], region[3]};
      try {
        cfg.search.validate();
      } catch (const DomainError& e) {
        throw ConfigError(e.what());
      }
    }
    if (!k.empty()) cfg.eval.k = {k[0], k[1]};
    cfg.workers = resolve_workers(workers, cfg.workers);

    Context ctx{cfg, LiouvilleMap(RadialProfile(cfg.profile), cfg.quad_tol), app.get_subcommands().front()->get_name(),
                timestamp};

    if (ctx.command == "grid") {
      const std::string csv = cmd_grid(ctx, fill);
      if (cfg.csv_path.empty()) {
        out << csv;
      } else {
        write_text(cfg.csv_path, csv);
      }
      return kExitOk;
    }

    json results;
    int failures = 0;
    if (ctx.command == "eval") results = cmd_eval(ctx);
    else if (ctx.command == "spectrum") results = cmd_spectrum(ctx);
    else if (ctx.command == "density") results = cmd_density(ctx);
    else if (ctx.command == "strips") results = cmd_strips(ctx);
    else if (ctx.command == "indicator") results = cmd_indicator(ctx);
    else if (ctx.command == "basis") results = cmd_basis(ctx);
    else if (ctx.command == "expand") results = cmd_expand(ctx, samples_path);
    else if (ctx.command == "validate") results = cmd_validate(ctx, failures);

    const std::string text = envelope(ctx, std::move(results)).dump(2) + "\n";
    if (cfg.report_path.empty()) {
      out << text;
    } else {
      write_text(cfg.report_path, text);
    }
    return failures == 0 ? kExitOk : kExitValidationFailed;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DegenerateDeterminantError& e) {
    err << "degenerate: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const BoundaryCollisionError& e) {
    err << "boundary collision: " << e.what() << "\n";
    return kExitBoundary;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const NotAnEigenvalueError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace ite::cli
