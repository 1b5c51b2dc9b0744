#include "stochq/fokker_planck.hpp"

#include <cmath>

#include "periodic_symbols.hpp"
#include "stochq/error.hpp"

namespace stochq {

const Eigen::MatrixXd& GradedOperator::block(int k) const {
  if (k < 0 || k > dimension()) {
    throw Error(ErrorCode::degree, "no degree-" + std::to_string(k) + " block");
  }
  return blocks[k];
}

int GradedOperator::total_size() const {
  int n = 0;
  for (const auto& b : blocks) n += static_cast<int>(b.rows());
  return n;
}

double GradedOperator::norm() const {
  double s = 0.0;
  for (const auto& b : blocks) s += b.squaredNorm();
  return std::sqrt(s);
}

const Eigen::MatrixXd& ChargeOperator::block(int k) const {
  if (k < 0 || k >= static_cast<int>(blocks.size()) || blocks[k].size() == 0) {
    throw Error(ErrorCode::degree, "charge operator has no action on degree-" + std::to_string(k) +
                                       " cochains");
  }
  return blocks[k];
}

ChargeOperator supercharge(const MeshComplex& mesh, Backend backend) {
  ChargeOperator q;
  q.shift = 1;
  q.blocks.resize(mesh.dimension() + 1);
  for (int k = 0; k < mesh.dimension(); ++k) q.blocks[k] = exterior_derivative(mesh, k, backend).matrix;
  return q;
}

namespace {

void check_inputs(const MeshComplex& mesh, const FlowField& flow, const NoiseSpec& noise) {
  validate_flow(mesh, flow, noise);
  if (noise.deterministic() && !flow.is_zero()) {
    throw Error(ErrorCode::deterministic_limit,
                "epsilon = 0 with a nonzero flow: use the epsilon-sweep diagnostic "
                "(deterministic_generator) instead");
  }
}

// Zero-flow operators at epsilon = 0 use the unit metric.
NoiseSpec effective_noise(const NoiseSpec& noise) {
  return noise.deterministic() ? NoiseSpec{1.0} : noise;
}

}  // namespace

ChargeOperator pseudo_adjoint_charge(const MeshComplex& mesh, const FlowField& flow,
                                     const NoiseSpec& noise, Backend backend) {
  check_inputs(mesh, flow, noise);
  const NoiseSpec eff = effective_noise(noise);
  ChargeOperator qbar;
  qbar.shift = -1;
  qbar.blocks.resize(mesh.dimension() + 1);
  for (int k = 1; k <= mesh.dimension(); ++k) {
    qbar.blocks[k] = codifferential(mesh, k, eff, backend).matrix -
                     2.0 * interior_product(mesh, flow, k, backend).matrix;
  }
  return qbar;
}

GradedOperator half_anticommutator(const ChargeOperator& q, const ChargeOperator& qbar) {
  const int dim = static_cast<int>(q.blocks.size()) - 1;
  GradedOperator h;
  h.blocks.resize(dim + 1);
  for (int k = 0; k <= dim; ++k) {
    Eigen::Index n = k < dim ? q.blocks[k].cols() : qbar.blocks[k].cols();
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
    if (k >= 1) acc += q.blocks[k - 1] * qbar.blocks[k];
    if (k < dim) acc += qbar.blocks[k + 1] * q.blocks[k];
    h.blocks[k] = 0.5 * acc;
  }
  return h;
}

GradedOperator assemble_hamiltonian(const MeshComplex& mesh, const FlowField& flow,
                                    const NoiseSpec& noise, Backend backend) {
  check_inputs(mesh, flow, noise);
  const NoiseSpec eff = effective_noise(noise);
  const int dim = mesh.dimension();

  std::vector<Eigen::MatrixXd> d(dim), dagger(dim + 1);
  for (int k = 0; k < dim; ++k) d[k] = exterior_derivative(mesh, k, backend).matrix;
  for (int k = 1; k <= dim; ++k) dagger[k] = codifferential(mesh, k, eff, backend).matrix;

  GradedOperator h;
  h.epsilon = noise.epsilon;
  h.backend = backend;
  h.mesh_kind = mesh.kind();
  h.blocks.resize(dim + 1);
  for (int k = 0; k <= dim; ++k) {
    const int n = mesh.cell_count(k);
    Eigen::MatrixXd laplacian = Eigen::MatrixXd::Zero(n, n);
    if (k >= 1) laplacian += d[k - 1] * dagger[k];
    if (k < dim) laplacian += dagger[k + 1] * d[k];
    h.blocks[k] = 0.5 * laplacian;
    if (!flow.is_zero()) h.blocks[k] -= lie_derivative(mesh, flow, k, backend).matrix;
  }

  // Second assembly route: ½[Q, Q̄]₊.
  const GradedOperator alt =
      half_anticommutator(supercharge(mesh, backend), pseudo_adjoint_charge(mesh, flow, noise, backend));
  double diff = 0.0;
  for (int k = 0; k <= dim; ++k) diff += (alt.blocks[k] - h.blocks[k]).squaredNorm();
  const double scale = h.norm();
  if (std::sqrt(diff) > 1e-11 * scale) {
    throw Error(ErrorCode::numerical,
                "Hamiltonian assembly routes disagree: relative deviation " +
                    std::to_string(std::sqrt(diff) / scale));
  }
  return h;
}

GradedOperator deterministic_generator(const MeshComplex& mesh, const FlowField& flow,
                                       Backend backend) {
  validate_flow(mesh, FlowField{flow.samples, std::nullopt}, NoiseSpec{0.0});
  GradedOperator h;
  h.epsilon = 0.0;
  h.backend = backend;
  h.mesh_kind = mesh.kind();
  for (int k = 0; k <= mesh.dimension(); ++k) {
    h.blocks.push_back(-lie_derivative(mesh, flow, k, backend).matrix);
  }
  return h;
}

namespace {

Eigen::MatrixXd fd_conventional_circle(const MeshComplex& mesh, const Eigen::MatrixXd& a,
                                       double eps) {
  const int n = mesh.nx();
  const double h = mesh.spacing(0);
  // Flux at vertex v between cell v-1 (left) and cell v (right):
  //   J_v = -(eps/2) (P_v - P_{v-1}) / h - A_v (P_{v-1} + P_v) / 2
  Eigen::MatrixXd flux = Eigen::MatrixXd::Zero(n, n);
  for (int v = 0; v < n; ++v) {
    const int left = (v - 1 + n) % n;
    flux(v, v) += -0.5 * eps / h - 0.5 * a(v, 0);
    flux(v, left) += 0.5 * eps / h - 0.5 * a(v, 0);
  }
  // (H P)_c = (J_{c+1} - J_c) / h
  Eigen::MatrixXd div = Eigen::MatrixXd::Zero(n, n);
  for (int c = 0; c < n; ++c) {
    div(c, (c + 1) % n) += 1.0 / h;
    div(c, c) -= 1.0 / h;
  }
  return div * flux;
}

Eigen::MatrixXd fd_conventional_torus(const MeshComplex& mesh, const Eigen::MatrixXd& a,
                                      double eps) {
  const int nx = mesh.nx(), ny = mesh.ny(), nv = nx * ny;
  const double hx = mesh.spacing(0), hy = mesh.spacing(1);
  // Fluxes live on edges: x-flux through the y-edge (i,j) between cells
  // (i-1,j) and (i,j); y-flux through the x-edge (i,j) between (i,j-1), (i,j).
  Eigen::MatrixXd flux = Eigen::MatrixXd::Zero(2 * nv, nv);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int here = mesh.face_index(i, j);
      const double ax = 0.5 * (a(mesh.vertex_index(i, j), 0) + a(mesh.vertex_index(i, j + 1), 0));
      const int ey = mesh.y_edge(i, j);
      const int west = mesh.face_index(i - 1, j);
      flux(ey, here) += -0.5 * eps / hx - 0.5 * ax;
      flux(ey, west) += 0.5 * eps / hx - 0.5 * ax;

      const double ay = 0.5 * (a(mesh.vertex_index(i, j), 1) + a(mesh.vertex_index(i + 1, j), 1));
      const int ex = mesh.x_edge(i, j);
      const int south = mesh.face_index(i, j - 1);
      flux(ex, here) += -0.5 * eps / hy - 0.5 * ay;
      flux(ex, south) += 0.5 * eps / hy - 0.5 * ay;
    }
  }
  Eigen::MatrixXd div = Eigen::MatrixXd::Zero(nv, 2 * nv);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int c = mesh.face_index(i, j);
      div(c, mesh.y_edge(i + 1, j)) += 1.0 / hx;
      div(c, mesh.y_edge(i, j)) -= 1.0 / hx;
      div(c, mesh.x_edge(i, j + 1)) += 1.0 / hy;
      div(c, mesh.x_edge(i, j)) -= 1.0 / hy;
    }
  }
  return div * flux;
}

Eigen::MatrixXd fourier_conventional_circle(const MeshComplex& mesh, const Eigen::MatrixXd& a,
                                            double eps) {
  const int n = mesh.nx();
  const double length = mesh.lx();
  const auto to_mid = detail::circulant(
      n, [&](int m) { return detail::vertex_to_midpoint_derivative(m, n, length); });
  const auto to_vertex = detail::circulant(
      n, [&](int m) { return detail::midpoint_to_vertex_derivative(m, n, length); });
  const auto shift = detail::circulant(n, [&](int m) { return detail::midpoint_to_vertex(m, n, length); });
  // Densities at cell midpoints, fluxes at vertices.
  const Eigen::MatrixXd flux = -0.5 * eps * to_vertex - a.col(0).asDiagonal() * shift;
  return to_mid * flux;
}

}  // namespace

OperatorBlock conventional_fp_operator(const MeshComplex& mesh, const FlowField& flow,
                                       const NoiseSpec& noise, Backend backend) {
  validate_flow(mesh, flow, noise);
  if (!mesh.is_structured()) {
    throw Error(ErrorCode::unsupported_mesh, "conventional Fokker-Planck operator needs a structured grid");
  }
  if (noise.deterministic()) {
    throw Error(ErrorCode::deterministic_limit, "conventional Fokker-Planck operator needs epsilon > 0");
  }
  const int top = mesh.dimension();
  Eigen::MatrixXd m;
  if (backend == Backend::fourier) {
    if (mesh.kind() != MeshKind::circle) {
      throw Error(ErrorCode::unsupported_backend,
                  "direct Fourier assembly of the density operator is implemented on the circle only");
    }
    m = fourier_conventional_circle(mesh, flow.samples, noise.epsilon);
  } else {
    m = mesh.kind() == MeshKind::circle ? fd_conventional_circle(mesh, flow.samples, noise.epsilon)
                                        : fd_conventional_torus(mesh, flow.samples, noise.epsilon);
  }
  return {std::move(m), top, top, backend};
}

HermitianizedLangevin hermitianize_langevin(const MeshComplex& mesh, const FlowField& flow,
                                            const NoiseSpec& noise) {
  if (!flow.is_langevin()) {
    throw Error(ErrorCode::not_potential, "flow is not declared Langevin (no superpotential)");
  }
  if (mesh.kind() != MeshKind::circle) {
    throw Error(ErrorCode::unsupported_mesh, "exact Langevin hermitianization is implemented on circle grids");
  }
  if (noise.deterministic()) {
    throw Error(ErrorCode::deterministic_limit, "hermitianization needs epsilon > 0");
  }
  validate_flow(mesh, flow, noise);
  const int n = mesh.nx();
  const Eigen::VectorXd& w = *flow.superpotential;

  // Edge superpotential: endpoint average. Vertex superpotential: the
  // detailed-balance potential of the degree-0 block, which differs from the
  // sampled W at O(h^2).
  Eigen::VectorXd w1(n), w0(n);
  for (int e = 0; e < n; ++e) w1[e] = 0.5 * (w[e] + w[(e + 1) % n]);
  for (int v = 0; v < n; ++v) {
    const double left = w1[(v - 1 + n) % n];
    const double jump = w1[v] - left;
    w0[v] = 0.5 * (left + w1[v]) + 0.5 * std::log(std::cosh(jump));
  }

  HermitianizedLangevin out;
  const GradedOperator h = assemble_hamiltonian(mesh, flow, noise, Backend::finite_difference);
  out.hamiltonian = h;
  out.cell_superpotential = {w0, w1};
  for (int k = 0; k <= 1; ++k) {
    const Eigen::VectorXd& wk = out.cell_superpotential[k];
    const Eigen::VectorXd up = wk.array().exp();
    const Eigen::VectorXd down = (-wk.array()).exp();
    out.hamiltonian.blocks[k] = up.asDiagonal() * h.blocks[k] * down.asDiagonal();
    const auto& hl = out.hamiltonian.blocks[k];
    out.asymmetry = std::max(out.asymmetry, (hl - hl.transpose()).norm() / hl.norm());
  }
  return out;
}

double intertwining_residual(const MeshComplex& mesh, const GradedOperator& h) {
  double worst = 0.0;
  const double scale = h.norm();
  for (int k = 0; k < mesh.dimension(); ++k) {
    const Eigen::MatrixXd d = exterior_derivative(mesh, k, h.backend).matrix;
    worst = std::max(worst, (d * h.blocks[k] - h.blocks[k + 1] * d).norm() / scale);
  }
  return worst;
}

}  // namespace stochq
