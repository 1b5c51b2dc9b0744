#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace stochq {

enum class MeshKind { circle, torus, surface };

const char* to_string(MeshKind kind);

// Discretization used for metric-dependent operators. The exterior derivative
// is the same signed incidence map for both.
enum class Backend { finite_difference, fourier };

const char* to_string(Backend backend);
Backend backend_from_string(const std::string& name);

// Noise intensity multiplying the base (identity) inverse metric.
struct NoiseSpec {
  double epsilon = 1.0;

  bool deterministic() const { return epsilon == 0.0; }
};

void validate(const NoiseSpec& noise);

using Point3 = std::array<double, 3>;
using Triangle = std::array<int, 3>;

struct SurfaceData {
  std::vector<Point3> vertices;
  std::vector<Triangle> faces;
};

// Cell complex over a closed phase-space manifold of dimension 1 or 2.
//
// Cells of degree k are numbered 0..cell_count(k)-1. boundary(k) is the
// signed incidence matrix of ∂_k with rows indexed by (k-1)-cells and columns
// by k-cells. Structured grids orient edges along the coordinate axes; faces
// are counterclockwise. Immutable after construction.
class MeshComplex {
 public:
  int dimension() const { return dimension_; }
  MeshKind kind() const { return kind_; }
  bool is_structured() const { return kind_ != MeshKind::surface; }

  int cell_count(int k) const;
  const Eigen::MatrixXi& boundary(int k) const;
  const Eigen::VectorXd& primal_volumes(int k) const;
  const Eigen::VectorXd& dual_volumes(int k) const;
  int euler_characteristic() const;
  // Ranks of the homology groups, from the ranks of the boundary maps.
  std::vector<int> betti_numbers() const;

  const std::vector<std::array<int, 2>>& edges() const { return edges_; }
  const std::vector<Triangle>& faces() const { return faces_; }
  const std::vector<Point3>& vertex_positions() const { return positions_; }

  // Coordinates of the barycenter of every k-cell (periodic coordinates for
  // structured grids, embedding coordinates for surfaces).
  std::vector<Point3> cell_centers(int k) const;

  // Structured-grid layout. ny == 1 and ly == 0 on the circle.
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double lx() const { return lx_; }
  double ly() const { return ly_; }
  double spacing(int axis) const { return axis == 0 ? lx_ / nx_ : ly_ / ny_; }
  double length(int axis) const { return axis == 0 ? lx_ : ly_; }
  int resolution(int axis) const { return axis == 0 ? nx_ : ny_; }
  double volume() const;

  int vertex_index(int i, int j = 0) const;
  int x_edge(int i, int j = 0) const;
  int y_edge(int i, int j) const;
  int face_index(int i, int j) const;

  bool well_centered() const { return well_centered_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  friend MeshComplex build_circle_grid(int n, double length);
  friend MeshComplex build_torus_grid(int nx, int ny, double lx, double ly);
  friend MeshComplex build_triangulated_surface(const SurfaceData& surface);

  void check_degree(int k) const;

  int dimension_ = 1;
  MeshKind kind_ = MeshKind::circle;
  std::array<int, 3> counts_{0, 0, 0};
  std::array<Eigen::MatrixXi, 3> boundary_;  // boundary_[k] for k = 1..dim
  std::array<Eigen::VectorXd, 3> primal_;
  std::array<Eigen::VectorXd, 3> dual_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<Triangle> faces_;
  std::vector<Point3> positions_;
  int nx_ = 0;
  int ny_ = 1;
  double lx_ = 0.0;
  double ly_ = 0.0;
  bool well_centered_ = true;
  std::vector<std::string> warnings_;
};

MeshComplex build_circle_grid(int n, double length);
MeshComplex build_torus_grid(int nx, int ny, double lx, double ly);
MeshComplex build_triangulated_surface(const SurfaceData& surface);

SurfaceData read_off(const std::filesystem::path& path);
SurfaceData parse_off(const std::string& text);
SurfaceData icosahedron();
// Loop-style midpoint subdivision projected back to the unit sphere.
SurfaceData icosphere(int subdivisions);

// Hodge star on k-cochains. Finite-difference stars are diagonal
// (dual/primal volume ratios); the Fourier backend on uniform periodic grids
// uses the exact circulant star for trigonometric polynomials. Both carry the
// noise scaling epsilon^(k - D/2) of the inverse metric epsilon * identity.
struct HodgeStar {
  int degree = 0;
  Eigen::MatrixXd matrix;
  bool diagonal = true;
  // Set when epsilon == 0: the matrix is the unit-metric star.
  bool deterministic_limit = false;

  Eigen::MatrixXd inverse() const;
};

HodgeStar hodge_star(const MeshComplex& mesh, int k, const NoiseSpec& noise,
                     Backend backend = Backend::finite_difference);

}  // namespace stochq
