#include <doctest.h>

#include <cmath>

#include "stochq/model_library.hpp"
#include "stochq/spectral_analysis.hpp"
#include "support.hpp"

using namespace stochq;
using testing::error_code;
using cplx = std::complex<double>;

namespace {

std::vector<cplx> all_values(const SpectrumReport& s) {
  std::vector<cplx> out;
  for (const auto& e : s.entries) out.push_back(e.value);
  return out;
}

SpectrumReport values_only(const ModelSpec& m, Backend backend = Backend::finite_difference) {
  return full_spectrum(assemble_hamiltonian(m.mesh, m.flow, m.noise, backend), {8192, 1e-7, false, true});
}

}  // namespace

TEST_CASE("every bundled model builds with its defaults") {
  for (const auto& info : available_models()) {
    const auto m = make_model(info.name, {});
    CHECK(m.name == info.name);
    CHECK_FALSE(info.summary.empty());
    for (const auto& [key, value] : info.defaults) CHECK(m.params.at(key) == value);
  }
  CHECK(available_models().size() >= 8);
}

TEST_CASE("make_model validates names and parameters") {
  CHECK(error_code([] { make_model("lorenz", {}); }) == ErrorCode::validation);
  CHECK(error_code([] { make_model("constant_drive_circle", {{"b", 1.0}}); }) == ErrorCode::validation);
  CHECK(error_code([] { make_model("constant_drive_circle", {{"n", 64.5}}); }) == ErrorCode::validation);
  CHECK(error_code([] { make_model("constant_drive_circle", {{"n", 2.0}}); }) == ErrorCode::invalid_resolution);
  CHECK(error_code([] { make_model("langevin_double_well_circle", {{"depth", -1.0}}); }) == ErrorCode::invalid_argument);
  CHECK(error_code([] { make_model("langevin_double_well_circle", {{"epsilon", 0.0}}); }) == ErrorCode::invalid_noise);
}

TEST_CASE("constant drive oracle round trip") {
  const auto m = constant_drive_circle(1.0, 0.2, 64);
  const auto s = values_only(m, Backend::fourier);
  double worst = 0.0;
  for (const auto& o : m.oracle.spectrum) {
    double best = INFINITY;
    for (const auto& e : s.entries) {
      if (e.degree == o.degree) best = std::min(best, std::abs(e.value - o.value));
    }
    worst = std::max(worst, best / std::max(std::abs(o.value), s.spectral_radius * 1e-3));
  }
  CHECK(worst < m.oracle.spectrum_tolerance);
  CHECK(m.oracle.witten_index.value_or(-1) == 0);
}

TEST_CASE("torus shear oracle: lowest modes and degeneracy") {
  const auto m = torus_shear_model(1.0, std::sqrt(2.0), 0.2, 16);
  const auto s = values_only(m, Backend::fourier);
  for (int deg = 0; deg <= 2; ++deg) {
    int hits = 0;
    for (const auto& e : s.entries) hits += e.degree == deg && std::abs(e.value - cplx(0.1, -1.0)) < 1e-10;
    CHECK(hits == (deg == 1 ? 2 : 1));
  }
  const auto still = torus_shear_model(0.0, 0.0, 1.0, 8);
  const auto w = witten_index(values_only(still), 1e-8 * values_only(still).spectral_radius);
  CHECK(w.zero_modes == std::vector<int>{1, 2, 1});
  CHECK(classify_phase(s, 1e-8 * s.spectral_radius, 1e-8 * s.spectral_radius).verdict == PhaseVerdict::unbroken);
}

TEST_CASE("limit identifications of the tilted model") {
  const auto flat = values_only(tilted_langevin_circle(0.0, 1.0, 0.2, 32));
  const auto drive = values_only(constant_drive_circle(1.0, 0.2, 32));
  CHECK(testing::multiset_distance(all_values(flat), all_values(drive)) < 1e-10);
  CHECK(testing::multiset_distance(all_values(drive), all_values(flat)) < 1e-10);

  const auto untilted = values_only(tilted_langevin_circle(1.0, 0.0, 0.2, 32));
  const auto well = values_only(langevin_double_well_circle(1.0, 0.2, 32));
  CHECK(testing::multiset_distance(all_values(untilted), all_values(well)) < 1e-10);
  CHECK(testing::multiset_distance(all_values(well), all_values(untilted)) < 1e-10);
  CHECK(tilted_langevin_circle(1.0, 0.0, 0.2, 32).is_langevin());
  CHECK_FALSE(tilted_langevin_circle(1.0, 3.0, 0.2, 32).is_langevin());
}

TEST_CASE("double well: real nonnegative spectrum with ground state at zero") {
  const auto m = langevin_double_well_circle(1.0, 0.2, 64);
  const auto s = values_only(m);
  const double r = s.spectral_radius;
  double max_imag = 0.0, min_real = INFINITY;
  for (const auto& e : s.entries) {
    max_imag = std::max(max_imag, std::abs(e.energy()));
    min_real = std::min(min_real, e.gamma());
  }
  CHECK(max_imag <= 1e-9 * r);
  CHECK(min_real >= -1e-9 * r);
  CHECK(std::abs(s.entries.front().value) < 1e-9);
  CHECK(classify_phase(s, 1e-8 * r, 1e-8 * r).verdict == PhaseVerdict::unbroken);
  CHECK(m.minima == 2);
}

TEST_CASE("tilted double well carries uncondensed resonances") {
  const auto s = values_only(tilted_langevin_circle(1.0, 3.0, 0.2, 64));
  const double tau = 1e-8 * s.spectral_radius;
  bool resonance = false;
  for (const auto& e : s.entries) {
    resonance = resonance || (std::abs(e.energy()) > tau && e.gamma() > tau);
    CHECK(e.gamma() >= -tau);
  }
  CHECK(resonance);
  CHECK(conjugate_closure_defect(s) < 1e-10);
  CHECK(classify_phase(s, tau, tau).verdict == PhaseVerdict::unbroken);
}

TEST_CASE("deterministic constant drive has a purely imaginary spectrum") {
  const auto m = constant_drive_circle(1.0, 0.2, 64);
  const auto s = full_spectrum(deterministic_generator(m.mesh, m.flow), {8192, 1e-7, false, true});
  double worst = 0.0;
  for (const auto& e : s.entries) worst = std::max(worst, std::abs(e.gamma()));
  CHECK(worst <= 1e-12 * s.spectral_radius);
}

TEST_CASE("sphere diffusion reproduces the Euler characteristic") {
  const auto m = sphere_diffusion(2, 1.0);
  CHECK(m.oracle.witten_index.value_or(-1) == 2);
  const auto s = values_only(m);
  CHECK(witten_index(s, 1e-8 * s.spectral_radius).index == 2);
}

TEST_CASE("with_epsilon rebuilds the noise consistently") {
  const auto m = langevin_double_well_circle(1.0, 0.2, 32);
  const auto m2 = with_epsilon(m, 0.1);
  CHECK(m2.noise.epsilon == 0.1);
  CHECK_NOTHROW(validate_flow(m2.mesh, m2.flow, m2.noise));
  // The Langevin flow scales with epsilon, so the whole spectrum scales linearly.
  const auto a = all_values(values_only(m));
  auto b = all_values(values_only(m2));
  for (auto& v : b) v *= 2.0;
  CHECK(testing::multiset_distance(a, b) < 1e-10 * 50.0);
}

TEST_CASE("spectral invariants across the model library") {
  for (const auto& info : available_models()) {
    CAPTURE(info.name);
    const auto m = make_model(info.name, {});
    const auto h = assemble_hamiltonian(m.mesh, m.flow, m.noise);
    const auto s = full_spectrum(h);
    const double r = s.spectral_radius;
    double min_gamma = INFINITY;
    for (const auto& e : s.entries) min_gamma = std::min(min_gamma, e.gamma());
    CHECK(min_gamma >= -1e-8 * r);
    CHECK(conjugate_closure_defect(s) < 1e-10);
    const auto pairing = susy_pairing_check(s, 1e-8, 1e-8 * r);
    CHECK(pairing.unpaired.empty());
    double min_gap = INFINITY;
    for (int k = 0; k <= m.mesh.dimension(); ++k) {
      const auto v = s.eigenvalues(k);
      for (size_t i = 0; i < v.size(); ++i) {
        for (size_t j = i + 1; j < v.size(); ++j) min_gap = std::min(min_gap, std::abs(v[i] - v[j]));
      }
    }
    if (min_gap > 1e-6) CHECK(s.max_biorth_residual < 1e-8);
    CHECK(witten_index(s, 1e-8 * r).index == m.mesh.euler_characteristic());
    if (m.oracle.witten_index) CHECK(*m.oracle.witten_index == m.mesh.euler_characteristic());
  }
}

TEST_CASE("strongly non-normal gradient flow keeps a real paired spectrum") {
  for (double eps : {0.2, 0.1, 0.05}) {
    CAPTURE(eps);
    const auto m = sine_flow_circle(1.0, eps, 256);
    const auto s = values_only(m);
    const double r = s.spectral_radius;
    for (const auto& e : s.entries) CHECK(std::abs(e.energy()) <= 1e-9 * r);
    CHECK(susy_pairing_check(s, 1e-8, 1e-8 * r).unpaired.empty());
  }
}

TEST_CASE("Witten index does not depend on the flow") {
  for (double depth : {0.25, 0.5, 1.0, 2.0}) {
    for (const auto& m : {langevin_double_well_circle(depth, 0.2, 48), single_well_circle(depth, 0.2, 48),
                          tilted_langevin_circle(depth, 1.5, 0.2, 48)}) {
      const auto s = values_only(m);
      CHECK(witten_index(s, 1e-8 * s.spectral_radius).index == 0);
    }
  }
}
