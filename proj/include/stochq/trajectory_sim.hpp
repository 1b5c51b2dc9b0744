#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "stochq/model_library.hpp"

namespace stochq {

struct SimulationParams {
  double dt = 0.01;
  long steps = 1000;
  int n_paths = 100;
  std::uint64_t seed = 1;
  // Keep every record_stride-th state (the initial state is always kept).
  int record_stride = 1;
  // 0 picks the hardware concurrency. Results do not depend on it.
  int threads = 0;
};

// Paths of ∂_t φ = -A(φ) + ξ, <ξ ξ> = ε δ, wrapped into [0, L).
struct TrajectoryEnsemble {
  int dims = 1;
  std::array<double, 2> lengths{0.0, 0.0};
  double epsilon = 0.0;
  SimulationParams params;
  long records = 0;  // states kept per path
  // Layout: path-major, then record, then coordinate.
  std::vector<double> paths;
  // Unwrapped total displacement per path and coordinate.
  std::vector<double> displacement;
  std::string model;
  std::vector<std::string> warnings;

  double at(int path, long record, int dim) const {
    return paths[(static_cast<std::size_t>(path) * records + record) * dims + dim];
  }
  double record_interval() const { return params.dt * params.record_stride; }
};

// Explicit first-order stepping φ <- φ - A(φ) dt + sqrt(ε dt) N(0, 1) with one
// independently seeded stream per path; bit-identical for a fixed seed.
TrajectoryEnsemble simulate_sde(const ModelSpec& model, const SimulationParams& params);

struct DriftEstimate {
  std::vector<double> mean_velocity;
  std::vector<double> velocity_stderr;
  // Mean squared total displacement per coordinate, and its standard error.
  std::vector<double> mean_square_displacement;
  std::vector<double> msd_stderr;
  double elapsed = 0.0;
};

DriftEstimate drift_estimate(const TrajectoryEnsemble& ensemble);

struct Histogram {
  int dims = 1;
  int bins = 0;  // per coordinate
  std::array<double, 2> lengths{0.0, 0.0};
  // Probability mass per bin, x fastest.
  std::vector<double> mass;
  long samples = 0;

  double bin_width(int dim) const { return lengths[dim] / bins; }
};

Histogram stationary_histogram(const TrajectoryEnsemble& ensemble, int bins, double burn_in = 0.2);

// Bin masses of an unnormalized density, by composite Simpson quadrature.
std::vector<double> reference_bin_mass(const Histogram& layout,
                                       const std::function<double(double, double)>& density);

double total_variation(const std::vector<double>& p, const std::vector<double>& q);

struct AutocorrelationOptions {
  double burn_in = 0.2;
  // Largest lag in time units; 0 uses half the recorded span.
  double max_lag = 0.0;
  // Fit window start in time units.
  double fit_start = 0.0;
  // Noise floor in units of |C(0)| / sqrt(n_paths).
  double floor_factor = 3.0;
  // Upper bound on path x origin x lag products.
  double work_budget = 2e8;
};

struct AutocorrelationFit {
  double rate = 0.0;
  double rate_stderr = 0.0;
  // Slope of arg C(τ); C ~ exp(-rate τ + i phase_slope τ).
  double phase_slope = 0.0;
  double frequency = 0.0;  // |phase_slope|
  double fit_start = 0.0;
  double fit_end = 0.0;
  int fit_points = 0;
  double noise_floor = 0.0;
  std::vector<double> lags;
  std::vector<std::complex<double>> correlation;
};

// C(τ) of the first Fourier mode exp(2πi φ / L) along the first coordinate,
// mean-subtracted and averaged over paths and origins, fitted on the window
// where |C| stays above the noise floor.
AutocorrelationFit autocorrelation_decay(const TrajectoryEnsemble& ensemble,
                                         const AutocorrelationOptions& options = {});

// Raw paths as little-endian float64 plus a JSON sidecar describing the layout.
void dump_paths(const TrajectoryEnsemble& ensemble, const std::filesystem::path& binary,
                const std::filesystem::path& sidecar);

}  // namespace stochq
