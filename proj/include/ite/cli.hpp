#pragma once

#include <cstdint>
#include <iosfwd>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "ite/profile.hpp"
#include "ite/radial_solver.hpp"
#include "ite/riesz.hpp"

namespace ite::cli {

inline constexpr const char* kToolVersion = "0.1.0";

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidationFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitBoundary = 4;
inline constexpr int kExitDegenerate = 5;

struct RunConfig {
  RadialProfile::Spec profile = SmoothBump{};
  IntegratorConfig integrator;
  double quad_tol = 1e-12;
  Box search{0.1, 40, -6, 6};
  ZeroSearchConfig zeros;  // integrator, seed and workers are taken from the fields here

  struct Eval {
    cplx k{10, 1};
  } eval;
  struct Density {
    double epsilon = 0.2;
    std::vector<double> radii{10, 20, 40};
  } density;
  struct Strips {
    double start = 20;
    double length = 20;
    double half_width = 1;
  } strips;
  struct Separation {
    std::optional<double> exclusion_radius;  // default 3 pi / (1+B)
    double near_collision = 1e-3;
  } separation;
  struct Indicator {
    std::vector<double> thetas{1.5707963267948966, 0.78539816339744831};
    std::vector<double> radii{20, 40, 80};
    double max_radius = 400;
  } indicator;
  struct Horizontal {
    std::optional<double> h;  // default 2.5 pi / (1+B)
    double x_min = 5;
    double x_max = 60;
    int samples = 200;
  } horizontal;
  struct Basis {
    std::vector<std::size_t> n{20, 40};
    bool normalize = false;
    std::vector<double> completeness_radii{10, 20, 40};
    int panels = 0;  // 0: enough panels for 16 points per period at Re k = search.re_max
    int order = 16;
  } basis;

  int workers = 0;  // 0: ITE_WORKERS, else 1
  std::uint64_t seed = 0x5eed;
  std::string report_path;  // empty: stdout
  std::string csv_path;

  /// Zero-search settings with the shared integrator, seed and worker count filled in.
  ZeroSearchConfig zero_search() const;
};

/// Throws ConfigError on unknown keys, wrong types or invalid values.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

/// Canonical echo; parse_config(to_json(c)) reproduces c.
nlohmann::json to_json(const RunConfig& cfg);
nlohmann::json profile_to_json(const RadialProfile::Spec& spec);

/// The grid cmd_expand expects its samples on.
QuadratureGrid sample_grid(const RunConfig& cfg, double travel_time);

/// Entry point shared by the itesolve executable and the tests. `args`
/// excludes the program name. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ite::cli
