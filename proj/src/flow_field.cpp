#include "stochq/flow_field.hpp"

#include <cmath>

#include "stochq/error.hpp"

namespace stochq {

double FlowField::max_magnitude() const {
  if (samples.size() == 0) return 0.0;
  return samples.rowwise().norm().maxCoeff();
}

FlowField FlowField::zero(const MeshComplex& mesh) {
  const int cols = mesh.kind() == MeshKind::surface ? 3 : mesh.dimension();
  return FlowField{Eigen::MatrixXd::Zero(mesh.cell_count(0), cols), std::nullopt};
}

FlowField FlowField::sampled(const MeshComplex& mesh,
                             const std::function<std::array<double, 2>(double, double)>& field) {
  if (!mesh.is_structured()) {
    throw Error(ErrorCode::unsupported_mesh, "closed-form flows require a structured grid");
  }
  FlowField flow = zero(mesh);
  const auto centers = mesh.cell_centers(0);
  for (int v = 0; v < mesh.cell_count(0); ++v) {
    const auto a = field(centers[v][0], centers[v][1]);
    for (int d = 0; d < mesh.dimension(); ++d) flow.samples(v, d) = a[d];
  }
  return flow;
}

FlowField FlowField::langevin(const MeshComplex& mesh, const Eigen::VectorXd& superpotential,
                              const NoiseSpec& noise) {
  return FlowField{langevin_gradient(mesh, superpotential, noise), superpotential};
}

Eigen::MatrixXd langevin_gradient(const MeshComplex& mesh, const Eigen::VectorXd& superpotential,
                                  const NoiseSpec& noise) {
  validate(noise);
  if (!mesh.is_structured()) {
    throw Error(ErrorCode::unsupported_mesh, "Langevin flows require a structured grid");
  }
  if (superpotential.size() != mesh.cell_count(0)) {
    throw Error(ErrorCode::invalid_argument, "superpotential must have one value per vertex");
  }
  const int dim = mesh.dimension();
  Eigen::MatrixXd grad(mesh.cell_count(0), dim);
  for (int j = 0; j < mesh.ny(); ++j) {
    for (int i = 0; i < mesh.nx(); ++i) {
      const int v = mesh.vertex_index(i, j);
      for (int axis = 0; axis < dim; ++axis) {
        const int fwd = axis == 0 ? mesh.vertex_index(i + 1, j) : mesh.vertex_index(i, j + 1);
        const int bwd = axis == 0 ? mesh.vertex_index(i - 1, j) : mesh.vertex_index(i, j - 1);
        const double half = 0.5 * (superpotential[fwd] - superpotential[bwd]);
        grad(v, axis) = noise.epsilon / mesh.spacing(axis) * std::tanh(half);
      }
    }
  }
  return grad;
}

void validate_flow(const MeshComplex& mesh, const FlowField& flow, const NoiseSpec& noise) {
  validate(noise);
  if (flow.samples.rows() != mesh.cell_count(0)) {
    throw Error(ErrorCode::invalid_argument, "flow must have one sample row per vertex");
  }
  const int expected_cols = mesh.kind() == MeshKind::surface ? 3 : mesh.dimension();
  if (flow.samples.cols() != expected_cols) {
    throw Error(ErrorCode::invalid_argument, "flow has " + std::to_string(flow.samples.cols()) +
                                                 " components, expected " +
                                                 std::to_string(expected_cols));
  }
  if (!flow.samples.allFinite()) throw Error(ErrorCode::invalid_argument, "flow has non-finite samples");
  if (flow.is_langevin()) {
    const Eigen::MatrixXd expected = langevin_gradient(mesh, *flow.superpotential, noise);
    const double scale = std::max(expected.cwiseAbs().maxCoeff(), 1e-300);
    if ((expected - flow.samples).cwiseAbs().maxCoeff() > 1e-10 * scale) {
      throw Error(ErrorCode::not_potential,
                  "flow declared Langevin does not match the discrete gradient of its superpotential");
    }
  }
}

std::array<double, 2> interpolate_flow(const MeshComplex& mesh, const Eigen::MatrixXd& a, double x,
                                       double y) {
  const double hx = mesh.spacing(0);
  const double fx = x / hx;
  const double ix = std::floor(fx);
  const double s = fx - ix;
  const int i = static_cast<int>(ix);
  if (mesh.kind() == MeshKind::circle) {
    const double v = (1 - s) * a(mesh.vertex_index(i), 0) + s * a(mesh.vertex_index(i + 1), 0);
    return {v, 0.0};
  }
  const double hy = mesh.spacing(1);
  const double fy = y / hy;
  const double iy = std::floor(fy);
  const double t = fy - iy;
  const int j = static_cast<int>(iy);
  std::array<double, 2> out{};
  for (int c = 0; c < 2; ++c) {
    out[c] = (1 - s) * (1 - t) * a(mesh.vertex_index(i, j), c) +
             s * (1 - t) * a(mesh.vertex_index(i + 1, j), c) +
             (1 - s) * t * a(mesh.vertex_index(i, j + 1), c) + s * t * a(mesh.vertex_index(i + 1, j + 1), c);
  }
  return out;
}

Eigen::VectorXd sample_vertices(const MeshComplex& mesh,
                                const std::function<double(double, double)>& fn) {
  const auto centers = mesh.cell_centers(0);
  Eigen::VectorXd out(centers.size());
  for (std::size_t v = 0; v < centers.size(); ++v) out[v] = fn(centers[v][0], centers[v][1]);
  return out;
}

}  // namespace stochq
