#pragma once

#include <functional>
#include <optional>

#include <Eigen/Dense>

#include "stochq/mesh_complex.hpp"

namespace stochq {

// Flow A^i sampled on mesh vertices: one row per vertex, one column per
// coordinate direction (1 on the circle, 2 on the torus, 3 on surfaces).
// A flow declared Langevin carries its superpotential W on vertices.
struct FlowField {
  Eigen::MatrixXd samples;
  std::optional<Eigen::VectorXd> superpotential;

  bool is_zero() const { return samples.size() == 0 || samples.cwiseAbs().maxCoeff() == 0.0; }
  bool is_langevin() const { return superpotential.has_value(); }
  double max_magnitude() const;

  static FlowField zero(const MeshComplex& mesh);
  // Samples a closed-form field at vertex coordinates (x, y); y = 0 on the circle.
  static FlowField sampled(const MeshComplex& mesh,
                           const std::function<std::array<double, 2>(double, double)>& field);
  static FlowField langevin(const MeshComplex& mesh, const Eigen::VectorXd& superpotential,
                            const NoiseSpec& noise);
};

// Discrete metric gradient epsilon * grad W on a structured grid:
//   A_axis(v) = (epsilon / h) * tanh((W(v + e_axis) - W(v - e_axis)) / 2).
// On the circle this is the gradient whose finite-difference Hamiltonian
// satisfies detailed balance exactly with respect to exp(-2W).
Eigen::MatrixXd langevin_gradient(const MeshComplex& mesh, const Eigen::VectorXd& superpotential,
                                  const NoiseSpec& noise);

// Shape checks, plus the Langevin consistency check (relative 1e-10) when a
// superpotential is attached.
void validate_flow(const MeshComplex& mesh, const FlowField& flow, const NoiseSpec& noise);

// Periodic piecewise-linear (circle) or bilinear (torus) interpolant of
// vertex samples at (x, y).
std::array<double, 2> interpolate_flow(const MeshComplex& mesh, const Eigen::MatrixXd& samples,
                                       double x, double y);

// Samples a scalar function at vertex coordinates.
Eigen::VectorXd sample_vertices(const MeshComplex& mesh,
                                const std::function<double(double, double)>& fn);

}  // namespace stochq
