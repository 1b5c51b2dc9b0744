#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <random>
#include <vector>

#include "stochq/error.hpp"
#include "stochq/flow_field.hpp"
#include "stochq/mesh_complex.hpp"

namespace testing {

inline constexpr double two_pi = 6.283185307179586476925286766559;

// Smooth random periodic field: a few low Fourier modes with normal
// coefficients, one independent draw per component.
inline stochq::FlowField random_flow(const stochq::MeshComplex& mesh, std::mt19937_64& rng, int modes = 3) {
  std::normal_distribution<double> normal;
  const int dims = mesh.dimension();
  std::vector<double> coef;
  for (int c = 0; c < dims * (2 * modes + 1) * (2 * modes + 1) * 2; ++c) coef.push_back(normal(rng) / (1.0 + c % 7));
  const double lx = mesh.length(0);
  const double ly = dims > 1 ? mesh.length(1) : 1.0;
  return stochq::FlowField::sampled(mesh, [&](double x, double y) {
    std::array<double, 2> out{0.0, 0.0};
    std::size_t i = 0;
    for (int d = 0; d < dims; ++d) {
      for (int p = -modes; p <= modes; ++p) {
        for (int q = (dims > 1 ? -modes : 0); q <= (dims > 1 ? modes : 0); ++q) {
          const double arg = two_pi * (p * x / lx + q * y / ly);
          out[d] += coef[i] * std::cos(arg) + coef[i + 1] * std::sin(arg);
          i += 2;
        }
      }
    }
    return out;
  });
}

// Distance from each value in a to the nearest value in b, maximized.
inline double multiset_distance(const std::vector<std::complex<double>>& a,
                                const std::vector<std::complex<double>>& b) {
  double worst = 0.0;
  for (const auto& x : a) {
    double best = INFINITY;
    for (const auto& y : b) best = std::min(best, std::abs(x - y));
    worst = std::max(worst, best);
  }
  return worst;
}

// Code of the stochq::Error raised by fn, if any.
template <class F>
std::optional<stochq::ErrorCode> error_code(F&& fn) {
  try {
    fn();
  } catch (const stochq::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace testing
