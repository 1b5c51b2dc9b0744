#pragma once

#include <vector>

#include <Eigen/Dense>

#include "stochq/flow_field.hpp"
#include "stochq/mesh_complex.hpp"
#include "stochq/model_library.hpp"

namespace stochq {

// Isolated zero of the interpolated flow.
struct CriticalPoint {
  Point3 location{0.0, 0.0, 0.0};
  // Cell containing the zero: the edge on the circle, the face on the torus.
  int cell = 0;
  // J(i, j) = ∂A_i / ∂x_j by centered differences of the interpolant.
  Eigen::MatrixXd jacobian;
  Eigen::VectorXcd eigenvalues;
  // Number of negative real eigenvalues.
  int delta = 0;
  int sign = 1;
  bool hyperbolic = true;
  bool complex_pair = false;
  // Eigenvalues with positive real part: directions that attract under
  // ∂_t φ = -A. This is the form degree of the one-loop ground state.
  int stable_directions = 0;
};

struct CriticalPointSet {
  std::vector<CriticalPoint> points;
  std::vector<std::string> warnings;
};

CriticalPointSet find_critical_points(const MeshComplex& mesh, const FlowField& flow);

// Σ (-1)^Δ; a non-hyperbolic point raises an indeterminate-index error.
int poincare_hopf_sum(const std::vector<CriticalPoint>& points);

struct GroundStateCochain {
  int degree = 0;
  Eigen::VectorXd values;
};

// Gaussian one-loop state localized at a hyperbolic point, normalized in the
// finite-difference star inner product.
GroundStateCochain one_loop_ground_state(const MeshComplex& mesh, const CriticalPoint& point,
                                         const NoiseSpec& noise);

// |<a, b>| / (|a| |b|) in the star inner product of the given degree.
double star_overlap(const MeshComplex& mesh, int degree, const NoiseSpec& noise,
                    const Eigen::VectorXcd& a, const Eigen::VectorXcd& b);

struct InstantonRow {
  double epsilon = 0.0;
  double splitting = 0.0;
  double first_non_tunneling = 0.0;
  // Degree-k eigenvalues below 10% of the first non-tunneling eigenvalue.
  std::vector<int> near_zero_counts;
  // Critical points per ground-state degree.
  std::vector<int> morse_counts;
};

struct InstantonScan {
  std::vector<InstantonRow> rows;
  int tunneling_count = 0;
  bool strictly_decreasing = false;
  // Second divided differences of log(splitting) against 1/ε.
  std::vector<double> second_differences;
  bool log_convex = false;
  bool weak_morse_counting = false;
};

// Tunneling splittings in degree 0 along a strictly decreasing ε list.
InstantonScan instanton_splitting_scan(const ModelSpec& model, const std::vector<double>& epsilons);

}  // namespace stochq
