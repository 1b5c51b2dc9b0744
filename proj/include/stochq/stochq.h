#ifndef STOCHQ_STOCHQ_H
#define STOCHQ_STOCHQ_H

/* C interface to the stochq library. Objects are opaque handles; every call
 * returns a status code and leaves a thread-local message behind on failure
 * (stq_last_error). Strings returned through char** are owned by the caller
 * and released with stq_string_free. */

#include <stddef.h>

#if defined(_WIN32)
#define STQ_API __declspec(dllexport)
#elif defined(__GNUC__)
#define STQ_API __attribute__((visibility("default")))
#else
#define STQ_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum stq_status {
  STQ_OK = 0,
  STQ_INVALID_ARGUMENT = 1,
  STQ_INVALID_RESOLUTION,
  STQ_TOPOLOGY,
  STQ_DEGREE,
  STQ_UNSUPPORTED_MESH,
  STQ_UNSUPPORTED_BACKEND,
  STQ_DETERMINISTIC_LIMIT,
  STQ_NOT_POTENTIAL,
  STQ_CAPACITY,
  STQ_NUMERICAL,
  STQ_ERGODIC_ZERO_MISSING,
  STQ_NO_INSTANTON,
  STQ_INDETERMINATE_INDEX,
  STQ_INVALID_NOISE,
  STQ_STATISTICS,
  STQ_UNFITTABLE,
  STQ_VALIDATION,
  STQ_IO,
  STQ_INTERNAL = 99
} stq_status;

typedef enum stq_backend { STQ_BACKEND_FD = 0, STQ_BACKEND_FOURIER = 1 } stq_backend;

typedef enum stq_verdict {
  STQ_VERDICT_UNBROKEN = 0,
  STQ_VERDICT_Q_BROKEN = 1,
  STQ_VERDICT_INDETERMINATE = 2
} stq_verdict;

typedef struct stq_mesh stq_mesh;
typedef struct stq_model stq_model;
typedef struct stq_spectrum stq_spectrum;

STQ_API const char* stq_version(void);
STQ_API const char* stq_status_string(stq_status status);
/* Message of the last failed call on this thread; empty when none. */
STQ_API const char* stq_last_error(void);
STQ_API void stq_string_free(char* s);

/* Meshes */
STQ_API stq_status stq_mesh_circle(int n, double length, stq_mesh** out);
STQ_API stq_status stq_mesh_torus(int nx, int ny, double lx, double ly, stq_mesh** out);
STQ_API stq_status stq_mesh_from_off(const char* path, stq_mesh** out);
STQ_API stq_status stq_mesh_icosphere(int subdivisions, stq_mesh** out);
STQ_API void stq_mesh_free(stq_mesh* mesh);
/* counts must hold 3 entries; unused degrees are set to 0. */
STQ_API stq_status stq_mesh_counts(const stq_mesh* mesh, int* dimension, int counts[3]);
STQ_API stq_status stq_mesh_euler_characteristic(const stq_mesh* mesh, int* chi);

/* Models from the bundled library; params_json is a JSON object of
 * parameter overrides or NULL. */
STQ_API stq_status stq_model_create(const char* name, const char* params_json, stq_model** out);
STQ_API void stq_model_free(stq_model* model);
/* JSON array of {name, summary, defaults}. */
STQ_API stq_status stq_models_list(char** json);

/* Spectra */
STQ_API stq_status stq_model_spectrum(const stq_model* model, stq_backend backend, stq_spectrum** out);
STQ_API void stq_spectrum_free(stq_spectrum* spectrum);
STQ_API stq_status stq_spectrum_size(const stq_spectrum* spectrum, size_t* n);
STQ_API stq_status stq_spectrum_radius(const stq_spectrum* spectrum, double* radius);
/* i-th eigenvalue in (gamma, e, degree) order. */
STQ_API stq_status stq_spectrum_eigenvalue(const stq_spectrum* spectrum, size_t i, int* degree,
                                           double* gamma, double* e);
/* Tolerances are relative to the spectral radius. */
STQ_API stq_status stq_spectrum_classify(const stq_spectrum* spectrum, double rel_tau_gamma,
                                         double rel_tau_energy, stq_verdict* verdict);
STQ_API stq_status stq_spectrum_witten_index(const stq_spectrum* spectrum, double rel_tau0, int* index);

/* Classification of a bare eigenvalue multiset with absolute tolerances. */
STQ_API stq_status stq_classify_eigenvalues(size_t n, const double* gamma, const double* e,
                                            double tau_gamma, double tau_energy, stq_verdict* verdict);

/* Runs a configuration file. out_dir, backend and seed override the file
 * when non-NULL. exit_code receives 0, 2 or 3; report_json (optional)
 * receives the report text. */
STQ_API stq_status stq_run_config(const char* config_path, const char* out_dir, const char* backend,
                                  const unsigned long long* seed, int* exit_code, char** report_json);

#ifdef __cplusplus
}
#endif

#endif
