#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stochq/error.hpp"
#include "stochq/mesh_complex.hpp"
#include "stochq/model_library.hpp"
#include "stochq/trajectory_sim.hpp"

namespace stochq {

inline constexpr const char* version_string = "0.1.0";

// Tolerances relative to the spectral radius.
struct Tolerances {
  double gamma = 1e-8;
  double energy = 1e-8;
  double zero = 1e-8;
};

struct SimulationConfig {
  SimulationParams params;
  int bins = 64;
  double burn_in = 0.2;
  bool dump_paths = false;
  AutocorrelationOptions autocorrelation;
};

struct RunConfig {
  nlohmann::ordered_json source;
  std::string model_name;
  ModelParams model_params;
  // Inline phase space and flow, used when no model name is given.
  std::optional<nlohmann::ordered_json> inline_mesh;
  std::optional<nlohmann::ordered_json> inline_flow;
  std::optional<double> epsilon;
  Backend backend = Backend::finite_difference;
  Tolerances tolerances;
  std::vector<std::string> tasks;
  std::vector<double> sweep_epsilons;
  std::vector<double> morse_epsilons;
  SimulationConfig simulation;
  std::filesystem::path output_dir = "stochq-out";
  // Relative paths inside the config resolve against this directory.
  std::filesystem::path base_dir = ".";
};

// Validates and normalizes a JSON run configuration. Problems raise a
// validation error naming the offending key.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = ".");
RunConfig load_config(const std::filesystem::path& path);

const std::vector<std::string>& known_tasks();

struct RunResult {
  int exit_code = 0;
  std::optional<ErrorCode> error;
  std::string error_message;
  std::string report;  // report.json text
  std::vector<std::filesystem::path> files;
};

// Executes the tasks in order and writes report.json, timings.json and the
// per-task data files into the output directory. Task failures are recorded
// in the report and mapped onto the exit code.
RunResult run(const RunConfig& config);

// 0 success, 2 validation failure, 3 numerical failure.
int exit_code_for(ErrorCode code);

}  // namespace stochq
