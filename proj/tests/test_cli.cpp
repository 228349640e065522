#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "ite/cli.hpp"
#include "ite/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = ite::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ite_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

fs::path write_config(const std::string& name, const json& doc) {
  const fs::path p = scratch(name);
  std::ofstream(p) << doc.dump(2);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("eval reports D0 for the default profile") {
  const auto r = run({"eval", "--k", "10", "1"});
  REQUIRE(r.code == ite::cli::kExitOk);
  const json doc = json::parse(r.out);
  CHECK(doc["tool"] == "itesolve");
  CHECK(doc["version"] == ite::cli::kToolVersion);
  CHECK(doc["command"] == "eval");
  CHECK(doc["profile"]["fingerprint"].get<std::string>().size() == 16);
  CHECK_FALSE(doc.contains("timestamp"));
  CHECK(doc["results"]["k"]["re"] == 10.0);
  CHECK(doc["results"]["asymptotic"].contains("reduced"));
}

TEST_CASE("eval on n = 1 exits with the degenerate code") {
  const auto cfg = write_config("one.json", {{"profile", {{"kind", "constant"}, {"n0", 1.0}}}});
  const auto r = run({"-c", cfg.string(), "eval"});
  CHECK(r.code == ite::cli::kExitDegenerate);
  CHECK(r.err.find("degenerate") != std::string::npos);
}

TEST_CASE("configuration errors exit with code 2") {
  const auto unknown = write_config("unknown.json", {{"profil", {{"kind", "constant"}, {"n0", 4.0}}}});
  CHECK(run({"-c", unknown.string(), "eval"}).code == ite::cli::kExitConfig);
  const auto negative = write_config("negative.json", {{"zeros", {{"zero_tol", -1.0}}}});
  CHECK(run({"-c", negative.string(), "eval"}).code == ite::cli::kExitConfig);
  const auto wrong_type = write_config("type.json", {{"seed", "abc"}});
  CHECK(run({"-c", wrong_type.string(), "eval"}).code == ite::cli::kExitConfig);
  CHECK(run({"eval", "--bogus"}).code == ite::cli::kExitConfig);
  CHECK(run({}).code == ite::cli::kExitConfig);
  CHECK(run({"--region", "5", "1", "0", "1", "spectrum"}).code == ite::cli::kExitConfig);
  CHECK(run({"-c", scratch("missing.json").string(), "eval"}).code == ite::cli::kExitConfig);
}

TEST_CASE("parse_config rejects unknown keys and bad values") {
  CHECK_THROWS_AS(ite::cli::parse_config(json{{"zeros", {{"zero_toll", 1e-10}}}}), ite::ConfigError);
  CHECK_THROWS_AS(ite::cli::parse_config(json{{"profile", {{"kind", "gaussian"}}}}), ite::ConfigError);
  CHECK_THROWS_AS(ite::cli::parse_config(json{{"integrator", {{"rel_tol", 1e-16}}}}), ite::ConfigError);
  CHECK_THROWS_AS(ite::cli::parse_config(json{{"quad_tol", 0.0}}), ite::ConfigError);
  CHECK_NOTHROW(ite::cli::parse_config(json::object()));
}

TEST_CASE("config round trip preserves the profile fingerprint") {
  for (const json& profile :
       {json{{"kind", "constant"}, {"n0", 2.25}}, json{{"kind", "smooth_bump"}, {"amplitude", 1.5}, {"power", 4}},
        json{{"kind", "spline"}, {"r", {0.0, 0.4, 1.0}}, {"n", {2.0, 1.7, 1.0}}}}) {
    const auto a = ite::cli::parse_config(json{{"profile", profile}, {"seed", 42}});
    const auto b = ite::cli::parse_config(ite::cli::to_json(a));
    CHECK(ite::fingerprint(ite::RadialProfile(a.profile)) == ite::fingerprint(ite::RadialProfile(b.profile)));
    CHECK(ite::cli::to_json(a) == ite::cli::to_json(b));
    CHECK(b.seed == 42);
  }
}

TEST_CASE("spectrum CSV contains the zero at pi for n = 4") {
  const auto cfg = write_config("four.json", {{"profile", {{"kind", "constant"}, {"n0", 4.0}}},
                                              {"search", {{"re_min", 0.1}, {"re_max", 10.0}, {"im_min", -1.0},
                                                          {"im_max", 1.0}}}});
  const auto csv = scratch("four.csv");
  const auto r = run({"-c", cfg.string(), "spectrum", "--csv", csv.string()});
  REQUIRE(r.code == ite::cli::kExitOk);
  std::istringstream lines(slurp(csv));
  std::string line;
  std::getline(lines, line);
  CHECK(line == "re,im,residual,multiplicity");
  bool found = false;
  while (std::getline(lines, line)) {
    double re = 0, im = 0;
    std::sscanf(line.c_str(), "%lf,%lf", &re, &im);
    if (std::abs(re - 3.14159265) < 1e-8 && im == 0) found = true;
  }
  CHECK(found);
  const json doc = json::parse(r.out);
  CHECK(doc["results"]["spectrum"]["complete"] == true);
}

TEST_CASE("spectrum reports are byte-identical across runs and worker counts") {
  const auto cfg = write_config("det.json", {{"search", {{"re_min", 0.1}, {"re_max", 15.0}, {"im_min", -3.0},
                                                         {"im_max", 3.0}}},
                                             {"seed", 1234}});
  const auto a = run({"-c", cfg.string(), "spectrum"});
  const auto b = run({"-c", cfg.string(), "spectrum"});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const auto c = run({"-c", cfg.string(), "-w", "3", "spectrum"});
  // The worker count is echoed in the config, so compare the results only.
  CHECK(json::parse(a.out)["results"] == json::parse(c.out)["results"]);
}

TEST_CASE("report goes to --out when given") {
  const auto out = scratch("eval_report.json");
  fs::remove(out);
  const auto r = run({"-o", out.string(), "eval"});
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  CHECK(json::parse(slurp(out))["command"] == "eval");
}

TEST_CASE("grid and expand round trip") {
  const auto cfg = write_config("expand.json", {{"profile", {{"kind", "constant"}, {"n0", 4.0}}},
                                                {"search", {{"re_min", 0.1}, {"re_max", 20.0}, {"im_min", -1.0},
                                                            {"im_max", 1.0}}},
                                                {"basis", {{"n", {4, 8}}}}});
  const auto samples = scratch("samples.csv");
  REQUIRE(run({"-c", cfg.string(), "grid", "--fill", "cos", "--csv", samples.string()}).code == 0);
  const auto r = run({"-c", cfg.string(), "expand", "--samples", samples.string()});
  REQUIRE(r.code == 0);
  const json doc = json::parse(r.out);
  const auto& runs = doc["results"]["expansions"];
  REQUIRE(runs.size() == 2);
  CHECK(runs[1]["residual"].get<double>() <= runs[0]["residual"].get<double>() + 1e-12);

  // Samples off the grid are rejected.
  std::ofstream(scratch("bad.csv")) << "r,re_f,im_f\n0.5,1,0\n";
  CHECK(run({"-c", cfg.string(), "expand", "--samples", scratch("bad.csv").string()}).code == ite::cli::kExitConfig);
  CHECK(run({"-c", cfg.string(), "grid", "--fill", "sin"}).code == ite::cli::kExitConfig);
}

TEST_CASE("timestamp is opt-in") {
  const auto r = run({"--timestamp", "eval"});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out).contains("timestamp"));
}
