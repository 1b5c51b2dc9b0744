#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "stochq/report.hpp"
#include "support.hpp"

using namespace stochq;
using testing::error_code;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("stochq_report_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

}  // namespace

TEST_CASE("config validation names the offending key") {
  const auto bad = [](const std::string& text) { return error_code([&] { parse_config(text); }); };
  CHECK(bad("{") == ErrorCode::validation);
  CHECK(bad(R"({"tasks": ["spectrum"]})") == ErrorCode::validation);
  CHECK(bad(R"({"model": {"name": "nope"}, "tasks": ["spectrum"]})") == ErrorCode::validation);
  CHECK(bad(R"({"model": {"name": "constant_drive_circle"}, "tasks": ["fly"]})") == ErrorCode::validation);
  CHECK(bad(R"({"model": {"name": "constant_drive_circle"}, "tasks": []})") == ErrorCode::validation);
  CHECK(bad(R"({"model": {"name": "constant_drive_circle"}, "tasks": ["spectrum", "spectrum"]})") == ErrorCode::validation);
  CHECK(bad(R"({"model": {"name": "constant_drive_circle"}, "tasks": ["spectrum"], "colour": 1})") == ErrorCode::validation);
  CHECK(bad(R"({"model": {"name": "constant_drive_circle"}, "tasks": ["sweep"], "sweep": {"epsilons": [0.1, 0.2]}})") ==
        ErrorCode::validation);
  CHECK(bad(R"({"model": {"name": "constant_drive_circle"}, "tasks": ["spectrum"], "epsilon": -1})") == ErrorCode::validation);
  CHECK(bad(R"({"model": {"name": "constant_drive_circle"}, "tasks": ["spectrum"], "backend": "wavelet"})") ==
        ErrorCode::validation);
  CHECK(bad(R"({"model": {"name": "constant_drive_circle"}, "tasks": ["spectrum"], "tolerances": {"gamma": 0}})") ==
        ErrorCode::validation);
  CHECK(bad(R"({"model": {"name": "constant_drive_circle"}, "tasks": ["simulate"], "simulation": {"dt": 0}})") ==
        ErrorCode::validation);
  CHECK(bad(R"({"mesh": {"kind": "circle"}, "tasks": ["spectrum"]})") == ErrorCode::validation);
  try {
    parse_config(R"({"model": {"name": "constant_drive_circle"}, "tasks": ["spectrum"], "colour": 1})");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("colour") != std::string::npos);
  }
}

TEST_CASE("exit codes map failure classes") {
  CHECK(exit_code_for(ErrorCode::validation) == 2);
  CHECK(exit_code_for(ErrorCode::topology) == 2);
  CHECK(exit_code_for(ErrorCode::numerical) == 3);
  CHECK(exit_code_for(ErrorCode::capacity) == 3);
  CHECK(exit_code_for(ErrorCode::statistics) == 3);
}

TEST_CASE("report and spectrum CSV for the constant drive") {
  auto cfg = parse_config(R"({
    "model": {"name": "constant_drive_circle", "params": {"n": 32}},
    "epsilon": 0.2, "backend": "fourier",
    "tasks": ["spectrum", "classify", "witten", "stationary"]})");
  cfg.output_dir = scratch("drive");
  const auto result = run(cfg);
  CHECK(result.exit_code == 0);
  const auto report = nlohmann::json::parse(result.report);
  CHECK(report["status"] == "ok");
  CHECK(report["results"]["classify"]["verdict"] == "unbroken-Markovian");
  CHECK(report["results"]["witten"]["witten_index"] == 0);
  CHECK(report["results"]["spectrum"]["oracle"]["within_tolerance"] == true);
  CHECK(report["results"]["stationary"]["max_relative_error"].get<double>() < 1e-10);
  CHECK(first_line(cfg.output_dir / "spectrum.csv") == "degree,index,gamma,e,pair_id,physical_flag");
  CHECK(slurp(cfg.output_dir / "report.json") == result.report);
  CHECK(fs::exists(cfg.output_dir / "timings.json"));
  fs::remove_all(cfg.output_dir);
}

TEST_CASE("reports are byte-stable across runs") {
  const std::string text = R"({
    "model": {"name": "langevin_double_well_circle", "params": {"n": 32}},
    "epsilon": 0.2,
    "tasks": ["spectrum", "morse", "simulate"],
    "morse": {"epsilons": [0.4, 0.2]},
    "simulation": {"steps": 400, "n_paths": 60, "seed": 5, "dt": 0.02}})";
  auto a = parse_config(text);
  a.output_dir = scratch("stable_a");
  auto b = parse_config(text);
  b.output_dir = scratch("stable_b");
  const auto ra = run(a);
  const auto rb = run(b);
  CHECK(ra.exit_code == 0);
  CHECK(ra.report == rb.report);
  for (const char* f : {"spectrum.csv", "histogram.csv", "morse.json", "fit_diagnostics.json"}) {
    CHECK(slurp(a.output_dir / f) == slurp(b.output_dir / f));
  }
  CHECK(first_line(a.output_dir / "histogram.csv") == "bin,x_lo,x_hi,mass,reference");
  fs::remove_all(a.output_dir);
  fs::remove_all(b.output_dir);
}

TEST_CASE("sweep reproduces the condensation ratio") {
  auto cfg = parse_config(R"({
    "model": {"name": "constant_drive_circle", "params": {"a": 2.0, "n": 32}},
    "backend": "fourier", "tasks": ["sweep"],
    "sweep": {"epsilons": [0.4, 0.2, 0.1, 0.05]}})");
  cfg.output_dir = scratch("sweep");
  const auto report = nlohmann::json::parse(run(cfg).report);
  const auto& sweep = report["results"]["sweep"];
  CHECK(sweep["strictly_decreasing"] == true);
  CHECK(sweep["condensation"] == true);
  for (const auto& row : sweep["rows"]) {
    CHECK(row["ratio"].get<double>() == doctest::Approx(row["expected_ratio"].get<double>()).epsilon(1e-8));
    CHECK(row["verdict"] == "unbroken-Markovian");
  }
  fs::remove_all(cfg.output_dir);
}

TEST_CASE("inline meshes and flows") {
  const auto dir = scratch("inline");
  fs::create_directories(dir);
  {
    std::ofstream off(dir / "tet.off");
    off << "OFF\n4 4 0\n1 1 1\n1 -1 -1\n-1 1 -1\n-1 -1 1\n3 0 1 2\n3 0 3 1\n3 0 2 3\n3 1 3 2\n";
  }
  {
    std::ofstream cfg(dir / "cfg.json");
    cfg << R"({"mesh": {"kind": "off", "path": "tet.off"}, "epsilon": 1.0, "tasks": ["witten"]})";
  }
  auto cfg = load_config(dir / "cfg.json");
  cfg.output_dir = dir / "out";
  const auto report = nlohmann::json::parse(run(cfg).report);
  CHECK(report["results"]["witten"]["witten_index"] == 2);

  auto circle = parse_config(R"({"mesh": {"kind": "circle", "n": 16}, "flow": {"constant": [0.5]},
                                 "epsilon": 0.3, "tasks": ["spectrum", "morse"]})");
  circle.output_dir = dir / "circle";
  const auto r2 = nlohmann::json::parse(run(circle).report);
  CHECK(r2["status"] == "ok");
  CHECK(r2["results"]["morse"]["points"].empty());
  fs::remove_all(dir);
}

TEST_CASE("inline superpotential reproduces the discrete stationary density") {
  const std::vector<double> w = {0.0, 0.4, 0.8, 0.4, 0.0, -0.4, -0.8, -0.3};
  nlohmann::json j = {{"mesh", {{"kind", "circle"}, {"n", 8}}},
                      {"flow", {{"superpotential", w}}},
                      {"epsilon", 0.5},
                      {"tasks", {"stationary"}}};
  auto cfg = parse_config(j.dump());
  cfg.output_dir = scratch("superpotential");
  const auto report = nlohmann::json::parse(run(cfg).report);
  REQUIRE(report["status"] == "ok");
  CHECK(report["results"]["stationary"]["max_relative_error"].get<double>() < 1e-12);

  const double h = 2.0 * M_PI / 8.0;
  std::vector<double> expected(8);
  double z = 0.0;
  for (int i = 0; i < 8; ++i) z += (expected[i] = std::exp(-(w[i] + w[(i + 1) % 8]))) * h;
  std::ifstream csv(cfg.output_dir / "stationary.csv");
  std::string line;
  std::getline(csv, line);
  for (int i = 0; i < 8; ++i) {
    REQUIRE(std::getline(csv, line));
    std::stringstream row(line);
    std::string cell;
    for (int col = 0; col < 4; ++col) std::getline(row, cell, ',');
    CHECK(std::stod(cell) == doctest::Approx(expected[i] / z).epsilon(1e-12));
  }
  fs::remove_all(cfg.output_dir);

  j["mesh"] = {{"kind", "icosphere"}, {"subdivisions", 0}};
  j["flow"]["superpotential"] = std::vector<double>(12, 0.0);
  auto sphere = parse_config(j.dump());
  sphere.output_dir = scratch("superpotential_sphere");
  const auto failed = run(sphere);
  CHECK(failed.exit_code == 2);
  CHECK(failed.error == ErrorCode::unsupported_mesh);
  fs::remove_all(sphere.output_dir);
}

TEST_CASE("task failures are recorded with their exit code") {
  auto cfg = parse_config(R"({"mesh": {"kind": "circle", "n": 16}, "flow": {"constant": [1.0]},
                             "epsilon": 0.0, "tasks": ["classify", "stationary"]})");
  cfg.output_dir = scratch("fail");
  const auto result = run(cfg);
  CHECK(result.exit_code == 2);
  REQUIRE(result.error.has_value());
  CHECK(*result.error == ErrorCode::deterministic_limit);
  const auto report = nlohmann::json::parse(result.report);
  CHECK(report["status"] == "failed");
  CHECK(report["error"]["code"] == "deterministic-limit");
  CHECK(report["error"]["task"] == "stationary");
  // Tasks before the failure keep their results.
  CHECK(report["results"]["classify"]["verdict"] == "Q-broken");
  fs::remove_all(cfg.output_dir);

  auto stats = parse_config(R"({"model": {"name": "constant_drive_circle", "params": {"n": 16}},
                               "tasks": ["simulate"], "simulation": {"steps": 50, "n_paths": 4}})");
  stats.output_dir = scratch("stats");
  CHECK(run(stats).exit_code == 3);
  fs::remove_all(stats.output_dir);
}
