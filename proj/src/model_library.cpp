#include "stochq/model_library.hpp"

#include <cmath>
#include <numbers>

#include "periodic_symbols.hpp"
#include "stochq/error.hpp"

namespace stochq {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

void require_resolution(int n, int minimum) {
  if (n < minimum) {
    throw Error(ErrorCode::invalid_resolution,
                "resolution " + std::to_string(n) + " below the minimum " + std::to_string(minimum));
  }
}

void require_positive_noise(double epsilon) {
  validate(NoiseSpec{epsilon});
  if (epsilon == 0.0) throw Error(ErrorCode::invalid_noise, "this model needs epsilon > 0");
}

std::vector<OracleEigenvalue> constant_drive_oracle(int n, double a, double epsilon) {
  std::vector<OracleEigenvalue> out;
  for (int m = detail::min_mode(n); m <= detail::max_mode(n); ++m) {
    if (detail::is_nyquist(m, n)) continue;
    const std::complex<double> value(0.5 * epsilon * m * m, -m * a);
    out.push_back({0, value});
    out.push_back({1, value});
  }
  return out;
}

ModelSpec circle_langevin(const std::string& name, double epsilon, int n,
                          std::function<double(double)> w, std::function<double(double)> dw) {
  require_positive_noise(epsilon);
  require_resolution(n, 8);
  ModelSpec m;
  m.name = name;
  m.mesh = build_circle_grid(n, two_pi);
  m.noise = NoiseSpec{epsilon};
  const Eigen::VectorXd values = sample_vertices(m.mesh, [&](double x, double) { return w(x); });
  m.flow = FlowField::langevin(m.mesh, values, m.noise);
  m.superpotential = [w](double x, double) { return w(x); };
  m.drift = [dw, epsilon](double x, double) { return std::array<double, 2>{epsilon * dw(x), 0.0}; };
  m.oracle.source = "closed-form stationary density";
  m.oracle.stationary_density = [w](double x, double) { return std::exp(-2.0 * w(x)); };
  m.oracle.witten_index = 0;
  m.oracle.real_spectrum = true;
  return m;
}

}  // namespace

ModelSpec constant_drive_circle(double a, double epsilon, int n) {
  validate(NoiseSpec{epsilon});
  require_resolution(n, 8);
  ModelSpec m;
  m.name = "constant_drive_circle";
  m.params = {{"a", a}, {"epsilon", epsilon}, {"n", static_cast<double>(n)}};
  m.mesh = build_circle_grid(n, two_pi);
  m.noise = NoiseSpec{epsilon};
  m.flow = FlowField::sampled(m.mesh, [a](double, double) { return std::array<double, 2>{a, 0.0}; });
  m.drift = [a](double, double) { return std::array<double, 2>{a, 0.0}; };
  m.oracle.source = "symbolic";
  m.oracle.spectrum = constant_drive_oracle(n, a, epsilon);
  m.oracle.spectrum_tolerance = 1e-10;
  m.oracle.stationary_density = [](double, double) { return 1.0; };
  m.oracle.witten_index = 0;
  m.oracle.note =
      "eigenvalues eps*k^2/2 - i*k*a per degree, from the generator applied to exp(i*k*phi); "
      "the variant -2*i*k*a does not match the assembled operator";
  return m;
}

ModelSpec langevin_double_well_circle(double depth, double epsilon, int n) {
  if (!(depth > 0.0)) throw Error(ErrorCode::invalid_argument, "depth must be positive");
  ModelSpec m = circle_langevin(
      "langevin_double_well_circle", epsilon, n,
      [depth](double x) { return depth * std::cos(2.0 * x); },
      [depth](double x) { return -2.0 * depth * std::sin(2.0 * x); });
  m.params = {{"depth", depth}, {"epsilon", epsilon}, {"n", static_cast<double>(n)}};
  m.minima = 2;
  return m;
}

ModelSpec single_well_circle(double depth, double epsilon, int n) {
  if (!(depth > 0.0)) throw Error(ErrorCode::invalid_argument, "depth must be positive");
  ModelSpec m = circle_langevin(
      "single_well_circle", epsilon, n, [depth](double x) { return depth * std::cos(x); },
      [depth](double x) { return -depth * std::sin(x); });
  m.params = {{"depth", depth}, {"epsilon", epsilon}, {"n", static_cast<double>(n)}};
  m.minima = 1;
  return m;
}

ModelSpec tilted_langevin_circle(double depth, double tilt, double epsilon, int n) {
  if (depth < 0.0) throw Error(ErrorCode::invalid_argument, "depth must be nonnegative");
  require_positive_noise(epsilon);
  require_resolution(n, 8);
  ModelSpec m;
  m.name = "tilted_langevin_circle";
  m.params = {{"depth", depth}, {"tilt", tilt}, {"epsilon", epsilon}, {"n", static_cast<double>(n)}};
  m.mesh = build_circle_grid(n, two_pi);
  m.noise = NoiseSpec{epsilon};
  const Eigen::VectorXd w =
      sample_vertices(m.mesh, [depth](double x, double) { return depth * std::cos(2.0 * x); });
  m.flow.samples = langevin_gradient(m.mesh, w, m.noise).array() + tilt;
  if (tilt == 0.0 && depth > 0.0) m.flow.superpotential = w;
  m.drift = [depth, tilt, epsilon](double x, double) {
    return std::array<double, 2>{-2.0 * epsilon * depth * std::sin(2.0 * x) + tilt, 0.0};
  };
  m.minima = depth > 0.0 ? 2 : 0;
  m.oracle.witten_index = 0;
  if (depth == 0.0) {
    m.oracle.source = "symbolic";
    m.oracle.spectrum = constant_drive_oracle(n, tilt, epsilon);
    m.oracle.spectrum_tolerance = 1e-10;
  } else if (tilt == 0.0) {
    m.oracle.source = "closed-form stationary density";
    m.oracle.stationary_density = [depth](double x, double) {
      return std::exp(-2.0 * depth * std::cos(2.0 * x));
    };
    m.oracle.real_spectrum = true;
  } else {
    m.oracle.source = "conjugate-pair structure";
  }
  return m;
}

ModelSpec torus_shear_model(double ax, double ay, double epsilon, int n) {
  validate(NoiseSpec{epsilon});
  require_resolution(n, 4);
  ModelSpec m;
  m.name = "torus_shear_model";
  m.params = {{"ax", ax}, {"ay", ay}, {"epsilon", epsilon}, {"n", static_cast<double>(n)}};
  m.mesh = build_torus_grid(n, n, two_pi, two_pi);
  m.noise = NoiseSpec{epsilon};
  m.flow = FlowField::sampled(m.mesh, [ax, ay](double, double) { return std::array<double, 2>{ax, ay}; });
  m.drift = [ax, ay](double, double) { return std::array<double, 2>{ax, ay}; };
  m.oracle.source = "symbolic";
  m.oracle.spectrum_tolerance = 1e-10;
  for (int my = detail::min_mode(n); my <= detail::max_mode(n); ++my) {
    for (int mx = detail::min_mode(n); mx <= detail::max_mode(n); ++mx) {
      if (detail::is_nyquist(mx, n) || detail::is_nyquist(my, n)) continue;
      const std::complex<double> value(0.5 * epsilon * (mx * mx + my * my), -(mx * ax + my * ay));
      m.oracle.spectrum.push_back({0, value});
      m.oracle.spectrum.push_back({1, value});
      m.oracle.spectrum.push_back({1, value});
      m.oracle.spectrum.push_back({2, value});
    }
  }
  m.oracle.stationary_density = [](double, double) { return 1.0; };
  m.oracle.witten_index = 0;
  return m;
}

ModelSpec sine_flow_circle(double amplitude, double epsilon, int n) {
  validate(NoiseSpec{epsilon});
  require_resolution(n, 8);
  ModelSpec m;
  m.name = "sine_flow_circle";
  m.params = {{"amplitude", amplitude}, {"epsilon", epsilon}, {"n", static_cast<double>(n)}};
  m.mesh = build_circle_grid(n, two_pi);
  m.noise = NoiseSpec{epsilon};
  const auto field = [amplitude](double x, double) {
    return std::array<double, 2>{amplitude * std::sin(x), 0.0};
  };
  m.flow = FlowField::sampled(m.mesh, field);
  m.drift = field;
  m.minima = amplitude != 0.0 ? 1 : 0;
  m.oracle.source = "index theorem";
  m.oracle.witten_index = 0;
  return m;
}

ModelSpec langevin_egg_crate_torus(double depth, double epsilon, int n) {
  if (!(depth > 0.0)) throw Error(ErrorCode::invalid_argument, "depth must be positive");
  require_positive_noise(epsilon);
  require_resolution(n, 4);
  ModelSpec m;
  m.name = "langevin_egg_crate_torus";
  m.params = {{"depth", depth}, {"epsilon", epsilon}, {"n", static_cast<double>(n)}};
  m.mesh = build_torus_grid(n, n, two_pi, two_pi);
  m.noise = NoiseSpec{epsilon};
  const auto w = [depth](double x, double y) { return depth * (std::cos(x) + std::cos(y)); };
  m.flow = FlowField::langevin(m.mesh, sample_vertices(m.mesh, w), m.noise);
  m.superpotential = w;
  m.drift = [depth, epsilon](double x, double y) {
    return std::array<double, 2>{-epsilon * depth * std::sin(x), -epsilon * depth * std::sin(y)};
  };
  m.minima = 1;
  m.oracle.source = "closed-form stationary density";
  m.oracle.stationary_density = [w](double x, double y) { return std::exp(-2.0 * w(x, y)); };
  m.oracle.witten_index = 0;
  m.oracle.real_spectrum = true;
  return m;
}

ModelSpec sphere_diffusion(int subdivisions, double epsilon) {
  require_positive_noise(epsilon);
  if (subdivisions < 0 || subdivisions > 4) {
    throw Error(ErrorCode::invalid_resolution, "subdivisions must lie in 0..4");
  }
  ModelSpec m;
  m.name = "sphere_diffusion";
  m.params = {{"subdivisions", static_cast<double>(subdivisions)}, {"epsilon", epsilon}};
  m.mesh = build_triangulated_surface(icosphere(subdivisions));
  m.noise = NoiseSpec{epsilon};
  m.flow = FlowField::zero(m.mesh);
  m.oracle.source = "index theorem";
  m.oracle.witten_index = 2;
  m.oracle.real_spectrum = true;
  return m;
}

const std::vector<ModelInfo>& available_models() {
  static const std::vector<ModelInfo> models = {
      {"constant_drive_circle", "constant flow a on the circle; exact spectrum",
       {{"a", 1.0}, {"epsilon", 0.2}, {"n", 64}}},
      {"langevin_double_well_circle", "Langevin flow of W = depth cos 2phi on the circle",
       {{"depth", 1.0}, {"epsilon", 0.2}, {"n", 64}}},
      {"tilted_langevin_circle", "double-well Langevin flow plus a constant tilt",
       {{"depth", 1.0}, {"tilt", 3.0}, {"epsilon", 0.2}, {"n", 64}}},
      {"torus_shear_model", "constant flow (ax, ay) on the torus; exact spectrum",
       {{"ax", 1.0}, {"ay", std::sqrt(2.0)}, {"epsilon", 0.2}, {"n", 16}}},
      {"sine_flow_circle", "flow amplitude sin phi on the circle (not rescaled by epsilon)",
       {{"amplitude", 1.0}, {"epsilon", 0.05}, {"n", 256}}},
      {"single_well_circle", "Langevin flow of W = depth cos phi (one minimum)",
       {{"depth", 1.0}, {"epsilon", 0.2}, {"n", 64}}},
      {"langevin_egg_crate_torus", "Langevin flow of W = depth (cos x + cos y) on the torus",
       {{"depth", 1.0}, {"epsilon", 0.2}, {"n", 16}}},
      {"sphere_diffusion", "pure diffusion on a subdivided icosahedron",
       {{"subdivisions", 2}, {"epsilon", 1.0}}},
  };
  return models;
}

namespace {

std::string model_names() {
  std::string out;
  for (const auto& m : available_models()) out += (out.empty() ? "" : ", ") + m.name;
  return out;
}

int as_int(const ModelParams& p, const std::string& key) {
  const double v = p.at(key);
  if (v != std::floor(v) || std::abs(v) > 1e8) {
    throw Error(ErrorCode::validation, "parameter '" + key + "' must be an integer");
  }
  return static_cast<int>(v);
}

}  // namespace

ModelSpec make_model(const std::string& name, const ModelParams& params) {
  const ModelInfo* info = nullptr;
  for (const auto& m : available_models()) {
    if (m.name == name) info = &m;
  }
  if (!info) {
    throw Error(ErrorCode::validation, "unknown model '" + name + "'; available: " + model_names());
  }
  ModelParams p = info->defaults;
  for (const auto& [key, value] : params) {
    if (!p.count(key)) {
      std::string known;
      for (const auto& kv : info->defaults) known += (known.empty() ? "" : ", ") + kv.first;
      throw Error(ErrorCode::validation,
                  "model '" + name + "' has no parameter '" + key + "'; parameters: " + known);
    }
    if (!std::isfinite(value)) throw Error(ErrorCode::validation, "parameter '" + key + "' is not finite");
    p[key] = value;
  }
  if (name == "constant_drive_circle") return constant_drive_circle(p["a"], p["epsilon"], as_int(p, "n"));
  if (name == "langevin_double_well_circle")
    return langevin_double_well_circle(p["depth"], p["epsilon"], as_int(p, "n"));
  if (name == "tilted_langevin_circle")
    return tilted_langevin_circle(p["depth"], p["tilt"], p["epsilon"], as_int(p, "n"));
  if (name == "torus_shear_model") return torus_shear_model(p["ax"], p["ay"], p["epsilon"], as_int(p, "n"));
  if (name == "sine_flow_circle") return sine_flow_circle(p["amplitude"], p["epsilon"], as_int(p, "n"));
  if (name == "single_well_circle") return single_well_circle(p["depth"], p["epsilon"], as_int(p, "n"));
  if (name == "langevin_egg_crate_torus")
    return langevin_egg_crate_torus(p["depth"], p["epsilon"], as_int(p, "n"));
  return sphere_diffusion(as_int(p, "subdivisions"), p["epsilon"]);
}

ModelSpec with_epsilon(const ModelSpec& model, double epsilon) {
  ModelParams p = model.params;
  p["epsilon"] = epsilon;
  return make_model(model.name, p);
}

}  // namespace stochq
