#include "stochq/stochq.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include <json.hpp>

#include "stochq/error.hpp"
#include "stochq/fokker_planck.hpp"
#include "stochq/mesh_complex.hpp"
#include "stochq/model_library.hpp"
#include "stochq/report.hpp"
#include "stochq/spectral_analysis.hpp"

struct stq_mesh {
  stochq::MeshComplex mesh;
};

struct stq_model {
  stochq::ModelSpec model;
};

struct stq_spectrum {
  stochq::SpectrumReport report;
};

namespace {

thread_local std::string last_error;

stq_status fail(stq_status status, const std::string& message) {
  last_error = message;
  return status;
}

template <class F>
stq_status guarded(F&& body) {
  try {
    last_error.clear();
    body();
    return STQ_OK;
  } catch (const stochq::Error& e) {
    return fail(static_cast<stq_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(STQ_CAPACITY, "out of memory");
  } catch (const std::exception& e) {
    return fail(STQ_INTERNAL, e.what());
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(bool ok, const char* what) {
  if (!ok) throw stochq::Error(stochq::ErrorCode::invalid_argument, what);
}

stochq::Backend to_backend(stq_backend b) {
  if (b == STQ_BACKEND_FD) return stochq::Backend::finite_difference;
  if (b == STQ_BACKEND_FOURIER) return stochq::Backend::fourier;
  throw stochq::Error(stochq::ErrorCode::unsupported_backend, "unknown backend");
}

stq_verdict to_verdict(stochq::PhaseVerdict v) {
  switch (v) {
    case stochq::PhaseVerdict::unbroken: return STQ_VERDICT_UNBROKEN;
    case stochq::PhaseVerdict::q_broken: return STQ_VERDICT_Q_BROKEN;
    default: return STQ_VERDICT_INDETERMINATE;
  }
}

}  // namespace

extern "C" {

const char* stq_version(void) { return stochq::version_string; }

const char* stq_status_string(stq_status status) {
  if (status == STQ_OK) return "ok";
  if (status == STQ_INTERNAL) return "internal";
  if (status >= STQ_INVALID_ARGUMENT && status <= STQ_IO) {
    return stochq::to_string(static_cast<stochq::ErrorCode>(status));
  }
  return "unknown";
}

const char* stq_last_error(void) { return last_error.c_str(); }

void stq_string_free(char* s) { std::free(s); }

stq_status stq_mesh_circle(int n, double length, stq_mesh** out) {
  return guarded([&] {
    require(out, "out is null");
    *out = new stq_mesh{stochq::build_circle_grid(n, length)};
  });
}

stq_status stq_mesh_torus(int nx, int ny, double lx, double ly, stq_mesh** out) {
  return guarded([&] {
    require(out, "out is null");
    *out = new stq_mesh{stochq::build_torus_grid(nx, ny, lx, ly)};
  });
}

stq_status stq_mesh_from_off(const char* path, stq_mesh** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new stq_mesh{stochq::build_triangulated_surface(stochq::read_off(path))};
  });
}

stq_status stq_mesh_icosphere(int subdivisions, stq_mesh** out) {
  return guarded([&] {
    require(out, "out is null");
    require(subdivisions >= 0 && subdivisions <= 5, "subdivisions must lie in 0..5");
    *out = new stq_mesh{stochq::build_triangulated_surface(stochq::icosphere(subdivisions))};
  });
}

void stq_mesh_free(stq_mesh* mesh) { delete mesh; }

stq_status stq_mesh_counts(const stq_mesh* mesh, int* dimension, int counts[3]) {
  return guarded([&] {
    require(mesh && dimension && counts, "null argument");
    *dimension = mesh->mesh.dimension();
    for (int k = 0; k < 3; ++k) counts[k] = k <= *dimension ? mesh->mesh.cell_count(k) : 0;
  });
}

stq_status stq_mesh_euler_characteristic(const stq_mesh* mesh, int* chi) {
  return guarded([&] {
    require(mesh && chi, "null argument");
    *chi = mesh->mesh.euler_characteristic();
  });
}

stq_status stq_model_create(const char* name, const char* params_json, stq_model** out) {
  return guarded([&] {
    require(name && out, "null argument");
    stochq::ModelParams params;
    if (params_json) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(params_json);
      } catch (const nlohmann::json::parse_error& e) {
        throw stochq::Error(stochq::ErrorCode::validation, std::string("params are not valid JSON: ") + e.what());
      }
      if (!j.is_object()) throw stochq::Error(stochq::ErrorCode::validation, "params must be a JSON object");
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!it.value().is_number()) {
          throw stochq::Error(stochq::ErrorCode::validation, "parameter '" + it.key() + "' must be a number");
        }
        params[it.key()] = it.value().get<double>();
      }
    }
    *out = new stq_model{stochq::make_model(name, params)};
  });
}

void stq_model_free(stq_model* model) { delete model; }

stq_status stq_models_list(char** json) {
  return guarded([&] {
    require(json, "null argument");
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (const auto& m : stochq::available_models()) {
      nlohmann::ordered_json defaults = nlohmann::ordered_json::object();
      for (const auto& [k, v] : m.defaults) defaults[k] = v;
      list.push_back({{"name", m.name}, {"summary", m.summary}, {"defaults", defaults}});
    }
    *json = copy_string(list.dump(2));
  });
}

stq_status stq_model_spectrum(const stq_model* model, stq_backend backend, stq_spectrum** out) {
  return guarded([&] {
    require(model && out, "null argument");
    const auto& m = model->model;
    const auto b = to_backend(backend);
    const auto op = m.noise.deterministic() && !m.flow.is_zero()
                        ? stochq::deterministic_generator(m.mesh, m.flow, b)
                        : stochq::assemble_hamiltonian(m.mesh, m.flow, m.noise, b);
    stochq::SpectralOptions options;
    options.compute_vectors = false;
    *out = new stq_spectrum{stochq::full_spectrum(op, options)};
  });
}

void stq_spectrum_free(stq_spectrum* spectrum) { delete spectrum; }

stq_status stq_spectrum_size(const stq_spectrum* spectrum, size_t* n) {
  return guarded([&] {
    require(spectrum && n, "null argument");
    *n = spectrum->report.entries.size();
  });
}

stq_status stq_spectrum_radius(const stq_spectrum* spectrum, double* radius) {
  return guarded([&] {
    require(spectrum && radius, "null argument");
    *radius = spectrum->report.spectral_radius;
  });
}

stq_status stq_spectrum_eigenvalue(const stq_spectrum* spectrum, size_t i, int* degree, double* gamma,
                                   double* e) {
  return guarded([&] {
    require(spectrum && degree && gamma && e, "null argument");
    require(i < spectrum->report.entries.size(), "eigenvalue index out of range");
    const auto& entry = spectrum->report.entries[i];
    *degree = entry.degree;
    *gamma = entry.gamma();
    *e = entry.energy();
  });
}

stq_status stq_spectrum_classify(const stq_spectrum* spectrum, double rel_tau_gamma, double rel_tau_energy,
                                 stq_verdict* verdict) {
  return guarded([&] {
    require(spectrum && verdict, "null argument");
    const double r = spectrum->report.spectral_radius;
    *verdict = to_verdict(stochq::classify_phase(spectrum->report, rel_tau_gamma * r, rel_tau_energy * r).verdict);
  });
}

stq_status stq_spectrum_witten_index(const stq_spectrum* spectrum, double rel_tau0, int* index) {
  return guarded([&] {
    require(spectrum && index, "null argument");
    *index = stochq::witten_index(spectrum->report, rel_tau0 * spectrum->report.spectral_radius).index;
  });
}

stq_status stq_classify_eigenvalues(size_t n, const double* gamma, const double* e, double tau_gamma,
                                    double tau_energy, stq_verdict* verdict) {
  return guarded([&] {
    require(verdict && (n == 0 || (gamma && e)), "null argument");
    std::vector<std::complex<double>> values;
    for (size_t i = 0; i < n; ++i) values.emplace_back(gamma[i], e[i]);
    *verdict = to_verdict(stochq::classify_eigenvalues(values, tau_gamma, tau_energy));
  });
}

stq_status stq_run_config(const char* config_path, const char* out_dir, const char* backend,
                          const unsigned long long* seed, int* exit_code, char** report_json) {
  if (exit_code) *exit_code = 2;
  if (report_json) *report_json = nullptr;
  stochq::RunResult result;
  const stq_status status = guarded([&] {
    require(config_path && exit_code, "null argument");
    auto cfg = stochq::load_config(config_path);
    if (out_dir) cfg.output_dir = out_dir;
    if (backend) cfg.backend = stochq::backend_from_string(backend);
    if (seed) cfg.simulation.params.seed = *seed;
    result = stochq::run(cfg);
    *exit_code = result.exit_code;
    if (report_json) *report_json = copy_string(result.report);
  });
  if (status != STQ_OK) {
    if (exit_code) *exit_code = status == STQ_INTERNAL ? 3 : stochq::exit_code_for(static_cast<stochq::ErrorCode>(status));
    return status;
  }
  if (result.error) return fail(static_cast<stq_status>(*result.error), result.error_message);
  return STQ_OK;
}

}  // extern "C"
