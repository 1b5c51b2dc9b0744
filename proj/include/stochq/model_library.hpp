#pragma once

#include <array>
#include <complex>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stochq/flow_field.hpp"
#include "stochq/mesh_complex.hpp"

namespace stochq {

using ModelParams = std::map<std::string, double>;

struct OracleEigenvalue {
  int degree = 0;
  std::complex<double> value;
};

// Known answers bundled with a model. Every field is optional.
struct ModelOracle {
  // How the oracle was obtained, e.g. "symbolic", "closed-form density".
  std::string source;
  std::vector<OracleEigenvalue> spectrum;
  double spectrum_tolerance = 0.0;  // relative, valid for the Fourier backend
  // Unnormalized stationary density on the phase space.
  std::function<double(double, double)> stationary_density;
  std::optional<int> witten_index;
  bool real_spectrum = false;
  std::string note;
};

struct ModelSpec {
  std::string name;
  ModelParams params;
  MeshComplex mesh;
  FlowField flow;
  NoiseSpec noise;
  // Closed-form flow A(x, y), used by the SDE integrator.
  std::function<std::array<double, 2>(double, double)> drift;
  // Closed-form superpotential for Langevin models.
  std::function<double(double, double)> superpotential;
  int minima = 0;
  ModelOracle oracle;

  bool is_langevin() const { return flow.is_langevin(); }
};

struct ModelInfo {
  std::string name;
  std::string summary;
  ModelParams defaults;
};

ModelSpec constant_drive_circle(double a, double epsilon, int n);
// W = depth cos 2φ, A = ε ∇W.
ModelSpec langevin_double_well_circle(double depth, double epsilon, int n);
// A = ε ∇W + tilt with W = depth cos 2φ.
ModelSpec tilted_langevin_circle(double depth, double tilt, double epsilon, int n);
// Constant flow (ax, ay) on the 2π × 2π torus.
ModelSpec torus_shear_model(double ax, double ay, double epsilon, int n);
// A = amplitude sin φ, not rescaled with ε.
ModelSpec sine_flow_circle(double amplitude, double epsilon, int n);
// W = depth cos φ (one minimum).
ModelSpec single_well_circle(double depth, double epsilon, int n);
// W = depth (cos x + cos y).
ModelSpec langevin_egg_crate_torus(double depth, double epsilon, int n);
// Pure diffusion on a subdivided icosahedron.
ModelSpec sphere_diffusion(int subdivisions, double epsilon);

const std::vector<ModelInfo>& available_models();

// Builds a model by name; missing parameters take their defaults. Unknown
// names or parameters raise a validation error listing the alternatives.
ModelSpec make_model(const std::string& name, const ModelParams& params);

// Same model with a different noise intensity.
ModelSpec with_epsilon(const ModelSpec& model, double epsilon);

}  // namespace stochq
