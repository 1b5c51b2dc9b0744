#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "stochq/stochq.h"

namespace {

int list_models() {
  char* json = nullptr;
  if (stq_models_list(&json) != STQ_OK) {
    std::fprintf(stderr, "error: %s\n", stq_last_error());
    return 3;
  }
  std::printf("%s\n", json);
  stq_string_free(json);
  return 0;
}

int run_config(const std::string& path, const std::string& out_dir, const std::string& backend,
               const unsigned long long* seed) {
  int exit_code = 2;
  const stq_status status = stq_run_config(path.c_str(), out_dir.empty() ? nullptr : out_dir.c_str(),
                                           backend.empty() ? nullptr : backend.c_str(), seed, &exit_code, nullptr);
  if (status != STQ_OK) {
    std::fprintf(stderr, "error [%s]: %s\n", stq_status_string(status), stq_last_error());
  }
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral analysis of stochastic flows on discrete phase spaces"};
  app.set_version_flag("--version", stq_version());
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string backend;
  unsigned long long seed = 0;

  auto* run = app.add_subcommand("run", "execute a JSON run configuration");
  run->add_option("config", config_path, "configuration file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "output directory (overrides the config)");
  auto* seed_opt = run->add_option("--seed", seed, "simulation seed (overrides the config)");
  run->add_option("--backend", backend, "discretization backend")->check(CLI::IsMember({"fd", "fourier"}));

  app.add_subcommand("models", "list bundled models with their default parameters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (app.got_subcommand("models")) return list_models();
  return run_config(config_path, out_dir, backend, seed_opt->count() ? &seed : nullptr);
}
