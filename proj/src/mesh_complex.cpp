#include "stochq/mesh_complex.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <queue>
#include <sstream>

#include "periodic_symbols.hpp"
#include "stochq/error.hpp"

namespace stochq {

const char* to_string(MeshKind kind) {
  switch (kind) {
    case MeshKind::circle: return "circle";
    case MeshKind::torus: return "torus";
    case MeshKind::surface: return "surface";
  }
  return "unknown";
}

const char* to_string(Backend backend) {
  return backend == Backend::fourier ? "fourier" : "fd";
}

Backend backend_from_string(const std::string& name) {
  if (name == "fd" || name == "finite-difference" || name == "finite_difference") {
    return Backend::finite_difference;
  }
  if (name == "fourier") return Backend::fourier;
  throw Error(ErrorCode::validation, "unknown backend '" + name + "' (expected fd|fourier)");
}

void validate(const NoiseSpec& noise) {
  if (!(noise.epsilon >= 0.0) || !std::isfinite(noise.epsilon)) {
    throw Error(ErrorCode::invalid_noise, "noise intensity must be finite and >= 0");
  }
}

void MeshComplex::check_degree(int k) const {
  if (k < 0 || k > dimension_) {
    throw Error(ErrorCode::degree, "degree " + std::to_string(k) + " outside [0, " +
                                       std::to_string(dimension_) + "]");
  }
}

int MeshComplex::cell_count(int k) const {
  check_degree(k);
  return counts_[k];
}

const Eigen::MatrixXi& MeshComplex::boundary(int k) const {
  if (k < 1 || k > dimension_) {
    throw Error(ErrorCode::degree, "boundary operator defined for degrees 1.." +
                                       std::to_string(dimension_));
  }
  return boundary_[k];
}

const Eigen::VectorXd& MeshComplex::primal_volumes(int k) const {
  check_degree(k);
  return primal_[k];
}

const Eigen::VectorXd& MeshComplex::dual_volumes(int k) const {
  check_degree(k);
  return dual_[k];
}

int MeshComplex::euler_characteristic() const {
  int chi = 0;
  for (int k = 0; k <= dimension_; ++k) chi += (k % 2 == 0 ? 1 : -1) * counts_[k];
  return chi;
}

std::vector<int> MeshComplex::betti_numbers() const {
  std::vector<int> rank(dimension_ + 2, 0);
  for (int k = 1; k <= dimension_; ++k) {
    rank[k] = static_cast<int>(Eigen::FullPivLU<Eigen::MatrixXd>(boundary_[k].cast<double>()).rank());
  }
  std::vector<int> out;
  for (int k = 0; k <= dimension_; ++k) out.push_back(counts_[k] - rank[k] - rank[k + 1]);
  return out;
}

double MeshComplex::volume() const { return dual_[0].sum(); }

int MeshComplex::vertex_index(int i, int j) const {
  i = ((i % nx_) + nx_) % nx_;
  j = ((j % ny_) + ny_) % ny_;
  return i + nx_ * j;
}

int MeshComplex::x_edge(int i, int j) const { return vertex_index(i, j); }

int MeshComplex::y_edge(int i, int j) const { return nx_ * ny_ + vertex_index(i, j); }

int MeshComplex::face_index(int i, int j) const { return vertex_index(i, j); }

std::vector<Point3> MeshComplex::cell_centers(int k) const {
  check_degree(k);
  std::vector<Point3> out;
  out.reserve(counts_[k]);
  if (kind_ == MeshKind::surface) {
    if (k == 0) return positions_;
    if (k == 1) {
      for (const auto& e : edges_) {
        const auto& a = positions_[e[0]];
        const auto& b = positions_[e[1]];
        out.push_back({(a[0] + b[0]) / 2, (a[1] + b[1]) / 2, (a[2] + b[2]) / 2});
      }
      return out;
    }
    for (const auto& f : faces_) {
      Point3 c{0, 0, 0};
      for (int v : f) {
        for (int d = 0; d < 3; ++d) c[d] += positions_[v][d] / 3.0;
      }
      out.push_back(c);
    }
    return out;
  }
  const double hx = spacing(0);
  const double hy = kind_ == MeshKind::torus ? spacing(1) : 0.0;
  if (k == 0) {
    for (int j = 0; j < ny_; ++j)
      for (int i = 0; i < nx_; ++i) out.push_back({i * hx, j * hy, 0.0});
  } else if (k == 1) {
    for (int j = 0; j < ny_; ++j)
      for (int i = 0; i < nx_; ++i) out.push_back({(i + 0.5) * hx, j * hy, 0.0});
    if (kind_ == MeshKind::torus) {
      for (int j = 0; j < ny_; ++j)
        for (int i = 0; i < nx_; ++i) out.push_back({i * hx, (j + 0.5) * hy, 0.0});
    }
  } else {
    for (int j = 0; j < ny_; ++j)
      for (int i = 0; i < nx_; ++i) out.push_back({(i + 0.5) * hx, (j + 0.5) * hy, 0.0});
  }
  return out;
}

MeshComplex build_circle_grid(int n, double length) {
  if (n < 3) {
    throw Error(ErrorCode::invalid_resolution, "circle grid needs n >= 3, got " + std::to_string(n));
  }
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw Error(ErrorCode::invalid_argument, "circle length must be positive");
  }
  MeshComplex m;
  m.dimension_ = 1;
  m.kind_ = MeshKind::circle;
  m.nx_ = n;
  m.ny_ = 1;
  m.lx_ = length;
  m.counts_ = {n, n, 0};
  const double h = length / n;
  m.boundary_[1] = Eigen::MatrixXi::Zero(n, n);
  for (int e = 0; e < n; ++e) {
    const int tail = e;
    const int head = (e + 1) % n;
    m.edges_.push_back({tail, head});
    m.boundary_[1](tail, e) -= 1;
    m.boundary_[1](head, e) += 1;
  }
  for (int v = 0; v < n; ++v) m.positions_.push_back({v * h, 0.0, 0.0});
  m.primal_[0] = Eigen::VectorXd::Ones(n);
  m.dual_[0] = Eigen::VectorXd::Constant(n, h);
  m.primal_[1] = Eigen::VectorXd::Constant(n, h);
  m.dual_[1] = Eigen::VectorXd::Ones(n);
  return m;
}

MeshComplex build_torus_grid(int nx, int ny, double lx, double ly) {
  if (nx < 3 || ny < 3) {
    throw Error(ErrorCode::invalid_resolution, "torus grid needs nx, ny >= 3, got " +
                                                   std::to_string(nx) + "x" + std::to_string(ny));
  }
  if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly)) {
    throw Error(ErrorCode::invalid_argument, "torus lengths must be positive");
  }
  MeshComplex m;
  m.dimension_ = 2;
  m.kind_ = MeshKind::torus;
  m.nx_ = nx;
  m.ny_ = ny;
  m.lx_ = lx;
  m.ly_ = ly;
  const int nv = nx * ny;
  m.counts_ = {nv, 2 * nv, nv};
  const double hx = lx / nx;
  const double hy = ly / ny;

  m.boundary_[1] = Eigen::MatrixXi::Zero(nv, 2 * nv);
  m.edges_.resize(2 * nv);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int v = m.vertex_index(i, j);
      const int ex = m.x_edge(i, j);
      const int ey = m.y_edge(i, j);
      m.edges_[ex] = {v, m.vertex_index(i + 1, j)};
      m.edges_[ey] = {v, m.vertex_index(i, j + 1)};
      m.boundary_[1](v, ex) -= 1;
      m.boundary_[1](m.vertex_index(i + 1, j), ex) += 1;
      m.boundary_[1](v, ey) -= 1;
      m.boundary_[1](m.vertex_index(i, j + 1), ey) += 1;
      m.positions_.push_back({i * hx, j * hy, 0.0});
    }
  }

  // Counterclockwise face (i,j): bottom x-edge, right y-edge, top x-edge
  // reversed, left y-edge reversed.
  m.boundary_[2] = Eigen::MatrixXi::Zero(2 * nv, nv);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int f = m.face_index(i, j);
      m.boundary_[2](m.x_edge(i, j), f) += 1;
      m.boundary_[2](m.y_edge(i + 1, j), f) += 1;
      m.boundary_[2](m.x_edge(i, j + 1), f) -= 1;
      m.boundary_[2](m.y_edge(i, j), f) -= 1;
    }
  }

  m.primal_[0] = Eigen::VectorXd::Ones(nv);
  m.dual_[0] = Eigen::VectorXd::Constant(nv, hx * hy);
  m.primal_[1].resize(2 * nv);
  m.dual_[1].resize(2 * nv);
  m.primal_[1].head(nv).setConstant(hx);
  m.dual_[1].head(nv).setConstant(hy);
  m.primal_[1].tail(nv).setConstant(hy);
  m.dual_[1].tail(nv).setConstant(hx);
  m.primal_[2] = Eigen::VectorXd::Constant(nv, hx * hy);
  m.dual_[2] = Eigen::VectorXd::Ones(nv);
  return m;
}

namespace {

using Vec3 = Eigen::Vector3d;

Vec3 as_vec(const Point3& p) { return {p[0], p[1], p[2]}; }

double cot_at(const Vec3& apex, const Vec3& b, const Vec3& c) {
  const Vec3 u = b - apex;
  const Vec3 v = c - apex;
  return u.dot(v) / u.cross(v).norm();
}

// Reorients faces so every interior edge is traversed in opposite directions
// by its two faces. Throws on boundary edges, non-manifold edges and
// non-orientable input.
std::vector<Triangle> orient_faces(const std::vector<Triangle>& faces, int nv) {
  std::map<std::pair<int, int>, std::vector<int>> edge_faces;
  for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
    const auto& t = faces[f];
    for (int a = 0; a < 3; ++a) {
      int u = t[a], w = t[(a + 1) % 3];
      if (u < 0 || u >= nv || w < 0 || w >= nv) {
        throw Error(ErrorCode::topology, "face references vertex outside range");
      }
      if (u == w) throw Error(ErrorCode::topology, "degenerate face");
      edge_faces[{std::min(u, w), std::max(u, w)}].push_back(f);
    }
  }
  for (const auto& [edge, fs] : edge_faces) {
    if (fs.size() != 2) {
      throw Error(ErrorCode::topology,
                  "surface is not closed: edge (" + std::to_string(edge.first) + "," +
                      std::to_string(edge.second) + ") has " + std::to_string(fs.size()) +
                      " incident faces");
    }
  }
  auto direction = [](const Triangle& t, int u, int w) {
    for (int a = 0; a < 3; ++a) {
      if (t[a] == u && t[(a + 1) % 3] == w) return 1;
      if (t[a] == w && t[(a + 1) % 3] == u) return -1;
    }
    return 0;
  };

  std::vector<Triangle> out = faces;
  std::vector<int> state(faces.size(), 0);  // 0 unvisited, 1 kept, -1 flipped
  for (int seed = 0; seed < static_cast<int>(faces.size()); ++seed) {
    if (state[seed] != 0) continue;
    state[seed] = 1;
    std::queue<int> todo;
    todo.push(seed);
    while (!todo.empty()) {
      const int f = todo.front();
      todo.pop();
      const auto& t = out[f];
      for (int a = 0; a < 3; ++a) {
        const int u = t[a], w = t[(a + 1) % 3];
        const auto& fs = edge_faces[{std::min(u, w), std::max(u, w)}];
        const int g = fs[0] == f ? fs[1] : fs[0];
        // Neighbor must traverse (u,w) as (w,u).
        const int dir = direction(out[g], u, w);
        if (state[g] == 0) {
          if (dir == 1) {
            std::swap(out[g][1], out[g][2]);
            state[g] = -1;
          } else {
            state[g] = 1;
          }
          todo.push(g);
        } else if (dir == 1) {
          throw Error(ErrorCode::topology, "surface is not orientable");
        }
      }
    }
  }
  return out;
}

}  // namespace

MeshComplex build_triangulated_surface(const SurfaceData& surface) {
  const int nv = static_cast<int>(surface.vertices.size());
  if (nv < 4 || surface.faces.size() < 4) {
    throw Error(ErrorCode::topology, "closed surface needs at least 4 vertices and 4 faces");
  }
  MeshComplex m;
  m.dimension_ = 2;
  m.kind_ = MeshKind::surface;
  m.positions_ = surface.vertices;
  m.faces_ = orient_faces(surface.faces, nv);
  m.nx_ = 0;
  m.ny_ = 0;

  std::map<std::pair<int, int>, int> edge_id;
  {
    std::vector<std::array<int, 2>> edges;
    for (const auto& t : m.faces_) {
      for (int a = 0; a < 3; ++a) {
        const int u = t[a], w = t[(a + 1) % 3];
        edges.push_back({std::min(u, w), std::max(u, w)});
      }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    for (int e = 0; e < static_cast<int>(edges.size()); ++e) edge_id[{edges[e][0], edges[e][1]}] = e;
    m.edges_ = std::move(edges);
  }
  const int ne = static_cast<int>(m.edges_.size());
  const int nf = static_cast<int>(m.faces_.size());
  m.counts_ = {nv, ne, nf};

  m.boundary_[1] = Eigen::MatrixXi::Zero(nv, ne);
  for (int e = 0; e < ne; ++e) {
    m.boundary_[1](m.edges_[e][0], e) = -1;
    m.boundary_[1](m.edges_[e][1], e) = 1;
  }
  m.boundary_[2] = Eigen::MatrixXi::Zero(ne, nf);
  for (int f = 0; f < nf; ++f) {
    const auto& t = m.faces_[f];
    for (int a = 0; a < 3; ++a) {
      const int u = t[a], w = t[(a + 1) % 3];
      const int e = edge_id.at({std::min(u, w), std::max(u, w)});
      m.boundary_[2](e, f) = u < w ? 1 : -1;
    }
  }

  // Circumcentric duals. Signed circumcenter-to-midpoint distance of edge
  // (b,c) inside a triangle is |bc|/2 * cot(angle at a).
  Eigen::VectorXd dual_vertex = Eigen::VectorXd::Zero(nv);
  Eigen::VectorXd dual_edge = Eigen::VectorXd::Zero(ne);
  Eigen::VectorXd area(nf);
  Eigen::VectorXd bary_vertex = Eigen::VectorXd::Zero(nv);
  Eigen::VectorXd bary_edge = Eigen::VectorXd::Zero(ne);
  int obtuse = 0;
  for (int f = 0; f < nf; ++f) {
    const auto& t = m.faces_[f];
    const Vec3 p[3] = {as_vec(m.positions_[t[0]]), as_vec(m.positions_[t[1]]),
                       as_vec(m.positions_[t[2]])};
    area[f] = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]).norm();
    if (!(area[f] > 0.0)) throw Error(ErrorCode::topology, "zero-area face " + std::to_string(f));
    const Vec3 centroid = (p[0] + p[1] + p[2]) / 3.0;
    bool acute = true;
    for (int a = 0; a < 3; ++a) {
      const int b = (a + 1) % 3, c = (a + 2) % 3;
      const double cot_a = cot_at(p[a], p[b], p[c]);
      if (cot_a <= 0.0) acute = false;
      const double len = (p[c] - p[b]).norm();
      const int e = edge_id.at({std::min(t[b], t[c]), std::max(t[b], t[c])});
      dual_edge[e] += 0.5 * len * cot_a;
      bary_edge[e] += (centroid - 0.5 * (p[b] + p[c])).norm();
      // Voronoi share of the two endpoints.
      const double share = 0.125 * len * len * cot_a;
      dual_vertex[t[b]] += share;
      dual_vertex[t[c]] += share;
      bary_vertex[t[a]] += area[f] / 3.0;
    }
    if (!acute) ++obtuse;
  }
  if (obtuse > 0) {
    m.well_centered_ = false;
    m.warnings_.push_back("triangulation is not well-centered (" + std::to_string(obtuse) +
                          " non-acute faces); barycentric duals used");
    dual_vertex = bary_vertex;
    dual_edge = bary_edge;
  }

  m.primal_[0] = Eigen::VectorXd::Ones(nv);
  m.dual_[0] = dual_vertex;
  m.primal_[1].resize(ne);
  for (int e = 0; e < ne; ++e) {
    m.primal_[1][e] =
        (as_vec(m.positions_[m.edges_[e][1]]) - as_vec(m.positions_[m.edges_[e][0]])).norm();
  }
  m.dual_[1] = dual_edge;
  m.primal_[2] = area;
  m.dual_[2] = Eigen::VectorXd::Ones(nf);
  return m;
}

SurfaceData parse_off(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
  }
  if (tokens.empty() || tokens[0] != "OFF") {
    throw Error(ErrorCode::io, "OFF input must start with the 'OFF' header");
  }
  std::size_t pos = 1;
  auto next_int = [&]() -> long {
    if (pos >= tokens.size()) throw Error(ErrorCode::io, "truncated OFF input");
    try {
      return std::stol(tokens[pos++]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::io, "malformed integer in OFF input: " + tokens[pos - 1]);
    }
  };
  auto next_double = [&]() -> double {
    if (pos >= tokens.size()) throw Error(ErrorCode::io, "truncated OFF input");
    try {
      return std::stod(tokens[pos++]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::io, "malformed number in OFF input: " + tokens[pos - 1]);
    }
  };
  const long nv = next_int();
  const long nf = next_int();
  next_int();  // edge count, unused
  if (nv < 0 || nf < 0) throw Error(ErrorCode::io, "negative counts in OFF header");
  SurfaceData s;
  for (long v = 0; v < nv; ++v) {
    const double x = next_double(), y = next_double(), z = next_double();
    s.vertices.push_back({x, y, z});
  }
  for (long f = 0; f < nf; ++f) {
    if (next_int() != 3) throw Error(ErrorCode::topology, "only triangular faces are supported");
    const int a = static_cast<int>(next_int());
    const int b = static_cast<int>(next_int());
    const int c = static_cast<int>(next_int());
    s.faces.push_back({a, b, c});
  }
  return s;
}

SurfaceData read_off(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open OFF file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_off(buffer.str());
}

SurfaceData icosahedron() {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  SurfaceData s;
  s.vertices = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0}, {0, -1, t},  {0, 1, t},
                {0, -1, -t}, {0, 1, -t}, {t, 0, -1},  {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : s.vertices) {
    const double r = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
    for (auto& c : p) c /= r;
  }
  s.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  return s;
}

SurfaceData icosphere(int subdivisions) {
  if (subdivisions < 0) throw Error(ErrorCode::invalid_resolution, "subdivisions must be >= 0");
  SurfaceData s = icosahedron();
  for (int level = 0; level < subdivisions; ++level) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::make_pair(std::min(a, b), std::max(a, b));
      if (auto it = midpoint.find(key); it != midpoint.end()) return it->second;
      Point3 p;
      for (int d = 0; d < 3; ++d) p[d] = 0.5 * (s.vertices[a][d] + s.vertices[b][d]);
      const double r = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
      for (auto& c : p) c /= r;
      s.vertices.push_back(p);
      const int id = static_cast<int>(s.vertices.size()) - 1;
      midpoint[key] = id;
      return id;
    };
    std::vector<Triangle> next;
    for (const auto& t : s.faces) {
      const int ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
      next.push_back({t[0], ab, ca});
      next.push_back({t[1], bc, ab});
      next.push_back({t[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    s.faces = std::move(next);
  }
  return s;
}

Eigen::MatrixXd HodgeStar::inverse() const {
  if (diagonal) return matrix.diagonal().cwiseInverse().asDiagonal();
  return matrix.inverse();
}

HodgeStar hodge_star(const MeshComplex& mesh, int k, const NoiseSpec& noise, Backend backend) {
  validate(noise);
  if (k < 0 || k > mesh.dimension()) {
    throw Error(ErrorCode::degree, "Hodge star degree " + std::to_string(k) + " outside [0, " +
                                       std::to_string(mesh.dimension()) + "]");
  }
  HodgeStar star;
  star.degree = k;
  star.deterministic_limit = noise.deterministic();
  const double eps = noise.deterministic() ? 1.0 : noise.epsilon;
  const double scale = std::pow(eps, k - 0.5 * mesh.dimension());

  if (backend == Backend::finite_difference) {
    const Eigen::VectorXd ratio =
        mesh.dual_volumes(k).cwiseQuotient(mesh.primal_volumes(k)) * scale;
    star.matrix = ratio.asDiagonal();
    star.diagonal = true;
    return star;
  }

  if (!mesh.is_structured()) {
    throw Error(ErrorCode::unsupported_backend,
                "Fourier backend requires a uniform periodic grid");
  }
  star.diagonal = false;
  const int nx = mesh.nx();
  const double lx = mesh.lx();
  auto s0x = detail::circulant(nx, [&](int m) { return detail::vertex_to_dual_integral(m, nx, lx); });
  auto s1x = detail::circulant(nx, [&](int m) { return detail::edge_integral_to_midpoint(m, nx, lx); });
  if (mesh.kind() == MeshKind::circle) {
    star.matrix = scale * (k == 0 ? s0x : s1x);
    return star;
  }
  const int ny = mesh.ny();
  const double ly = mesh.ly();
  auto s0y = detail::circulant(ny, [&](int m) { return detail::vertex_to_dual_integral(m, ny, ly); });
  auto s1y = detail::circulant(ny, [&](int m) { return detail::edge_integral_to_midpoint(m, ny, ly); });
  const int nv = nx * ny;
  if (k == 0) {
    star.matrix = scale * detail::kron(s0y, s0x);
  } else if (k == 1) {
    star.matrix = Eigen::MatrixXd::Zero(2 * nv, 2 * nv);
    star.matrix.topLeftCorner(nv, nv) = scale * detail::kron(s0y, s1x);
    star.matrix.bottomRightCorner(nv, nv) = scale * detail::kron(s1y, s0x);
  } else {
    star.matrix = scale * detail::kron(s1y, s1x);
  }
  return star;
}

}  // namespace stochq
