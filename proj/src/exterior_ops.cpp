#include "stochq/exterior_ops.hpp"

#include "periodic_symbols.hpp"
#include "stochq/error.hpp"

namespace stochq {

namespace {

void require_fourier_grid(const MeshComplex& mesh, Backend backend) {
  if (backend == Backend::fourier && !mesh.is_structured()) {
    throw Error(ErrorCode::unsupported_backend, "Fourier backend requires a uniform periodic grid");
  }
}

Eigen::MatrixXd fd_interior_product(const MeshComplex& mesh, const Eigen::MatrixXd& a, int k) {
  const int nx = mesh.nx();
  const int ny = mesh.ny();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(mesh.cell_count(k - 1), mesh.cell_count(k));
  if (mesh.kind() == MeshKind::circle) {
    const double h = mesh.spacing(0);
    for (int v = 0; v < nx; ++v) {
      out(v, mesh.x_edge(v - 1)) += a(v, 0) / (2.0 * h);
      out(v, mesh.x_edge(v)) += a(v, 0) / (2.0 * h);
    }
    return out;
  }
  const double hx = mesh.spacing(0);
  const double hy = mesh.spacing(1);
  if (k == 1) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const int v = mesh.vertex_index(i, j);
        out(v, mesh.x_edge(i - 1, j)) += a(v, 0) / (2.0 * hx);
        out(v, mesh.x_edge(i, j)) += a(v, 0) / (2.0 * hx);
        out(v, mesh.y_edge(i, j - 1)) += a(v, 1) / (2.0 * hy);
        out(v, mesh.y_edge(i, j)) += a(v, 1) / (2.0 * hy);
      }
    }
    return out;
  }
  // ι_A (f dx∧dy) = f A_x dy - f A_y dx.
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double ax_on_y_edge =
          0.5 * (a(mesh.vertex_index(i, j), 0) + a(mesh.vertex_index(i, j + 1), 0));
      const int ey = mesh.y_edge(i, j);
      out(ey, mesh.face_index(i - 1, j)) += ax_on_y_edge / (2.0 * hx);
      out(ey, mesh.face_index(i, j)) += ax_on_y_edge / (2.0 * hx);

      const double ay_on_x_edge =
          0.5 * (a(mesh.vertex_index(i, j), 1) + a(mesh.vertex_index(i + 1, j), 1));
      const int ex = mesh.x_edge(i, j);
      out(ex, mesh.face_index(i, j - 1)) -= ay_on_x_edge / (2.0 * hy);
      out(ex, mesh.face_index(i, j)) -= ay_on_x_edge / (2.0 * hy);
    }
  }
  return out;
}

Eigen::MatrixXd fourier_interior_product(const MeshComplex& mesh, const Eigen::MatrixXd& a,
                                         int k) {
  const int nx = mesh.nx();
  const double lx = mesh.lx();
  const Eigen::MatrixXd px =
      detail::circulant(nx, [&](int m) { return detail::edge_integral_to_vertex(m, nx, lx); });
  if (mesh.kind() == MeshKind::circle) {
    return a.col(0).asDiagonal() * px;
  }
  const int ny = mesh.ny();
  const double ly = mesh.ly();
  const int nv = nx * ny;
  const Eigen::MatrixXd py =
      detail::circulant(ny, [&](int m) { return detail::edge_integral_to_vertex(m, ny, ly); });
  const Eigen::MatrixXd ix = Eigen::MatrixXd::Identity(nx, nx);
  const Eigen::MatrixXd iy = Eigen::MatrixXd::Identity(ny, ny);
  if (k == 1) {
    Eigen::MatrixXd out(nv, 2 * nv);
    out.leftCols(nv) = a.col(0).asDiagonal() * detail::kron(iy, px);
    out.rightCols(nv) = a.col(1).asDiagonal() * detail::kron(py, ix);
    return out;
  }
  const Eigen::MatrixXd jx =
      detail::circulant(nx, [&](int m) { return detail::vertex_to_edge_integral(m, nx, lx); });
  const Eigen::MatrixXd jy =
      detail::circulant(ny, [&](int m) { return detail::vertex_to_edge_integral(m, ny, ly); });
  const Eigen::MatrixXd point_values = detail::kron(py, px);
  Eigen::MatrixXd out(2 * nv, nv);
  out.topRows(nv) = -detail::kron(iy, jx) * a.col(1).asDiagonal() * point_values;
  out.bottomRows(nv) = detail::kron(jy, ix) * a.col(0).asDiagonal() * point_values;
  return out;
}

}  // namespace

OperatorBlock exterior_derivative(const MeshComplex& mesh, int k, Backend backend) {
  if (k < 0 || k >= mesh.dimension()) {
    throw Error(ErrorCode::degree, "exterior derivative defined for degrees 0.." +
                                       std::to_string(mesh.dimension() - 1) + ", got " +
                                       std::to_string(k));
  }
  require_fourier_grid(mesh, backend);
  return {mesh.boundary(k + 1).transpose().cast<double>(), k, k + 1, backend};
}

OperatorBlock codifferential(const MeshComplex& mesh, int k, const NoiseSpec& noise,
                             Backend backend) {
  validate(noise);
  if (k < 1 || k > mesh.dimension()) {
    throw Error(ErrorCode::degree, "codifferential defined for degrees 1.." +
                                       std::to_string(mesh.dimension()) + ", got " +
                                       std::to_string(k));
  }
  if (noise.deterministic()) {
    throw Error(ErrorCode::deterministic_limit,
                "codifferential needs epsilon > 0 (the metric is degenerate at epsilon = 0)");
  }
  const auto lower = hodge_star(mesh, k - 1, noise, backend);
  const auto upper = hodge_star(mesh, k, noise, backend);
  const Eigen::MatrixXd dt = mesh.boundary(k).cast<double>();
  return {lower.inverse() * dt * upper.matrix, k, k - 1, backend};
}

OperatorBlock interior_product(const MeshComplex& mesh, const FlowField& flow, int k,
                               Backend backend) {
  if (k < 1 || k > mesh.dimension()) {
    throw Error(ErrorCode::degree, "interior product defined for degrees 1.." +
                                       std::to_string(mesh.dimension()) + ", got " +
                                       std::to_string(k));
  }
  require_fourier_grid(mesh, backend);
  if (flow.samples.rows() != mesh.cell_count(0)) {
    throw Error(ErrorCode::invalid_argument, "flow must have one sample row per vertex");
  }
  if (!mesh.is_structured()) {
    if (!flow.is_zero()) {
      throw Error(ErrorCode::unsupported_mesh,
                  "interior product with a nonzero flow requires a structured grid");
    }
    return {Eigen::MatrixXd::Zero(mesh.cell_count(k - 1), mesh.cell_count(k)), k, k - 1, backend};
  }
  if (flow.samples.cols() < mesh.dimension()) {
    throw Error(ErrorCode::invalid_argument, "flow has fewer components than the mesh dimension");
  }
  Eigen::MatrixXd m = backend == Backend::fourier ? fourier_interior_product(mesh, flow.samples, k)
                                                  : fd_interior_product(mesh, flow.samples, k);
  return {std::move(m), k, k - 1, backend};
}

OperatorBlock lie_derivative(const MeshComplex& mesh, const FlowField& flow, int k,
                             Backend backend) {
  if (k < 0 || k > mesh.dimension()) {
    throw Error(ErrorCode::degree, "Lie derivative degree out of range");
  }
  if (!mesh.is_structured() && !flow.is_zero()) {
    throw Error(ErrorCode::unsupported_mesh, "Lie derivative with a nonzero flow requires a structured grid");
  }
  const int n = mesh.cell_count(k);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  if (k >= 1) {
    out += exterior_derivative(mesh, k - 1, backend).matrix *
           interior_product(mesh, flow, k, backend).matrix;
  }
  if (k < mesh.dimension()) {
    out += interior_product(mesh, flow, k + 1, backend).matrix *
           exterior_derivative(mesh, k, backend).matrix;
  }
  return {std::move(out), k, k, backend};
}

}  // namespace stochq
