#include "stochq/morse_analysis.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "stochq/error.hpp"
#include "stochq/fokker_planck.hpp"
#include "stochq/spectral_analysis.hpp"

namespace stochq {

namespace {

double wrap_delta(double d, double length) { return std::remainder(d, length); }

CriticalPoint linearize(const MeshComplex& mesh, const FlowField& flow, double x, double y, int cell) {
  const int dim = mesh.dimension();
  CriticalPoint p;
  p.location = {x, y, 0.0};
  p.cell = cell;
  p.jacobian.resize(dim, dim);
  for (int j = 0; j < dim; ++j) {
    const double h = mesh.spacing(j);
    const double dx = j == 0 ? h : 0.0;
    const double dy = j == 1 ? h : 0.0;
    const auto fwd = interpolate_flow(mesh, flow.samples, x + dx, y + dy);
    const auto bwd = interpolate_flow(mesh, flow.samples, x - dx, y - dy);
    for (int i = 0; i < dim; ++i) p.jacobian(i, j) = (fwd[i] - bwd[i]) / (2.0 * h);
  }
  p.eigenvalues = Eigen::EigenSolver<Eigen::MatrixXd>(p.jacobian, false).eigenvalues();
  const double scale = std::max(flow.max_magnitude(), 1e-300);
  for (const auto& lambda : p.eigenvalues) {
    const bool real = lambda.imag() == 0.0;
    if (!real) p.complex_pair = true;
    if (real && lambda.real() < 0.0) ++p.delta;
    if (lambda.real() > 0.0) ++p.stable_directions;
    if (std::abs(lambda.real()) < 1e-6 * scale) p.hyperbolic = false;
  }
  p.sign = p.delta % 2 == 0 ? 1 : -1;
  return p;
}

// Bilinear zeros of (A_x, A_y) in the unit cell, via the quadratic obtained by
// eliminating the first coordinate.
std::vector<std::array<double, 2>> bilinear_zeros(const std::array<double, 4>& ax,
                                                  const std::array<double, 4>& ay, double scale) {
  // f(s, t) = a + b s + c t + d s t with corners ordered 00, 10, 01, 11.
  auto coeffs = [](const std::array<double, 4>& f) {
    return std::array<double, 4>{f[0], f[1] - f[0], f[2] - f[0], f[3] - f[1] - f[2] + f[0]};
  };
  const auto [a1, b1, c1, d1] = coeffs(ax);
  const auto [a2, b2, c2, d2] = coeffs(ay);
  const double q0 = a1 * b2 - a2 * b1;
  const double q1 = a1 * d2 + c1 * b2 - a2 * d1 - c2 * b1;
  const double q2 = c1 * d2 - c2 * d1;
  const double tiny = 1e-14 * scale * scale;

  std::vector<double> ts;
  if (std::abs(q2) > tiny) {
    const double disc = q1 * q1 - 4 * q2 * q0;
    if (disc >= 0) {
      const double r = std::sqrt(disc);
      const double qq = -0.5 * (q1 + std::copysign(r, q1));
      ts.push_back(qq / q2);
      if (qq != 0.0) ts.push_back(q0 / qq);
    }
  } else if (std::abs(q1) > tiny) {
    ts.push_back(-q0 / q1);
  } else {
    return {};
  }

  std::vector<std::array<double, 2>> out;
  constexpr double slack = 1e-9;
  for (double t : ts) {
    if (t < -slack || t > 1 + slack) continue;
    const double den1 = b1 + d1 * t;
    const double den2 = b2 + d2 * t;
    double s;
    if (std::abs(den1) >= std::abs(den2)) {
      if (std::abs(den1) <= 1e-14 * scale) continue;
      s = -(a1 + c1 * t) / den1;
    } else {
      s = -(a2 + c2 * t) / den2;
    }
    if (s < -slack || s > 1 + slack) continue;
    const double rx = a1 + b1 * s + c1 * t + d1 * s * t;
    const double ry = a2 + b2 * s + c2 * t + d2 * s * t;
    if (std::hypot(rx, ry) > 1e-9 * scale) continue;
    out.push_back({std::clamp(s, 0.0, 1.0), std::clamp(t, 0.0, 1.0)});
  }
  return out;
}

}  // namespace

CriticalPointSet find_critical_points(const MeshComplex& mesh, const FlowField& flow) {
  if (!mesh.is_structured()) {
    throw Error(ErrorCode::unsupported_mesh, "critical-point detection needs a structured grid");
  }
  validate_flow(mesh, FlowField{flow.samples, std::nullopt}, NoiseSpec{0.0});
  CriticalPointSet out;
  if (flow.is_zero()) {
    out.warnings.push_back("flow vanishes identically; no isolated critical points");
    return out;
  }
  const double scale = flow.max_magnitude();
  const int nx = mesh.nx();
  const double hx = mesh.spacing(0);
  auto positive = [](double v) { return v >= 0.0; };

  if (mesh.kind() == MeshKind::circle) {
    const auto& a = flow.samples;
    for (int i = 0; i < nx; ++i) {
      const double a0 = a(i, 0);
      const double a1 = a(mesh.vertex_index(i + 1), 0);
      if (positive(a0) == positive(a1)) continue;
      const double t = a0 / (a0 - a1);
      double x = (i + t) * hx;
      if (x >= mesh.lx()) x -= mesh.lx();
      out.points.push_back(linearize(mesh, flow, x, 0.0, i));
    }
    std::sort(out.points.begin(), out.points.end(),
              [](const CriticalPoint& l, const CriticalPoint& r) { return l.location[0] < r.location[0]; });
    for (std::size_t p = 0; p < out.points.size() && out.points.size() > 1; ++p) {
      const auto& q = out.points[(p + 1) % out.points.size()];
      const double gap = std::abs(wrap_delta(q.location[0] - out.points[p].location[0], mesh.lx()));
      if (gap < 4 * hx) {
        out.warnings.push_back("adjacent zeros closer than 4 cells; refine the grid");
        break;
      }
    }
    return out;
  }

  const int ny = mesh.ny();
  const double hy = mesh.spacing(1);
  const auto& a = flow.samples;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int corner[4] = {mesh.vertex_index(i, j), mesh.vertex_index(i + 1, j),
                             mesh.vertex_index(i, j + 1), mesh.vertex_index(i + 1, j + 1)};
      std::array<double, 4> ax{}, ay{};
      for (int c = 0; c < 4; ++c) {
        ax[c] = a(corner[c], 0);
        ay[c] = a(corner[c], 1);
      }
      const auto [minx, maxx] = std::minmax_element(ax.begin(), ax.end());
      const auto [miny, maxy] = std::minmax_element(ay.begin(), ay.end());
      if (*minx > 0.0 || *maxx < 0.0 || *miny > 0.0 || *maxy < 0.0) continue;
      for (const auto& st : bilinear_zeros(ax, ay, scale)) {
        const double x = std::fmod((i + st[0]) * hx, mesh.lx());
        const double y = std::fmod((j + st[1]) * hy, mesh.ly());
        bool duplicate = false;
        for (const auto& p : out.points) {
          const double dx = wrap_delta(x - p.location[0], mesh.lx());
          const double dy = wrap_delta(y - p.location[1], mesh.ly());
          if (std::hypot(dx / hx, dy / hy) < 0.5) duplicate = true;
        }
        if (!duplicate) out.points.push_back(linearize(mesh, flow, x, y, mesh.face_index(i, j)));
      }
    }
  }
  for (std::size_t p = 0; p < out.points.size(); ++p) {
    for (std::size_t q = p + 1; q < out.points.size(); ++q) {
      const double dx = wrap_delta(out.points[q].location[0] - out.points[p].location[0], mesh.lx());
      const double dy = wrap_delta(out.points[q].location[1] - out.points[p].location[1], mesh.ly());
      if (std::hypot(dx / hx, dy / hy) < 4.0) {
        out.warnings.push_back("zeros closer than 4 cells; refine the grid");
        p = out.points.size();
        break;
      }
    }
  }
  std::sort(out.points.begin(), out.points.end(), [](const CriticalPoint& l, const CriticalPoint& r) {
    return l.location[1] != r.location[1] ? l.location[1] < r.location[1] : l.location[0] < r.location[0];
  });
  return out;
}

int poincare_hopf_sum(const std::vector<CriticalPoint>& points) {
  int sum = 0;
  for (const auto& p : points) {
    if (!p.hyperbolic) {
      throw Error(ErrorCode::indeterminate_index, "non-hyperbolic critical point; index undefined");
    }
    sum += p.sign;
  }
  return sum;
}

GroundStateCochain one_loop_ground_state(const MeshComplex& mesh, const CriticalPoint& point,
                                         const NoiseSpec& noise) {
  if (!point.hyperbolic) {
    throw Error(ErrorCode::indeterminate_index, "one-loop state needs a hyperbolic critical point");
  }
  validate(noise);
  if (noise.deterministic()) throw Error(ErrorCode::deterministic_limit, "one-loop state needs epsilon > 0");
  const double eps = noise.epsilon;
  GroundStateCochain out;
  out.degree = point.stable_directions;
  out.values = Eigen::VectorXd::Zero(mesh.cell_count(out.degree));
  const auto centers = mesh.cell_centers(out.degree);
  const double x0 = point.location[0];
  const double y0 = point.location[1];

  if (out.degree == 0) {
    out.values.setOnes();
  } else if (mesh.kind() == MeshKind::circle) {
    const double lambda = std::abs(point.eigenvalues[0].real());
    const double h = mesh.spacing(0);
    for (int e = 0; e < mesh.cell_count(1); ++e) {
      const double d = wrap_delta(centers[e][0] - x0, mesh.lx());
      out.values[e] = h * std::exp(-lambda * d * d / eps);
    }
  } else if (out.degree == 2) {
    // Stationary covariance of the linearized dynamics: J Σ + Σ J^T = ε I.
    const Eigen::Matrix2d j = point.jacobian;
    const Eigen::Matrix2d id = Eigen::Matrix2d::Identity();
    Eigen::Matrix4d lyap;
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c)
        for (int p = 0; p < 2; ++p)
          for (int q = 0; q < 2; ++q) lyap(2 * r + c, 2 * p + q) = j(r, p) * id(c, q) + id(r, p) * j(c, q);
    Eigen::Vector4d rhs(eps, 0.0, 0.0, eps);
    const Eigen::Vector4d sol = lyap.fullPivLu().solve(rhs);
    Eigen::Matrix2d sigma;
    sigma << sol[0], sol[1], sol[2], sol[3];
    const Eigen::Matrix2d prec = (0.5 * (sigma + sigma.transpose())).inverse();
    const double area = mesh.spacing(0) * mesh.spacing(1);
    for (int f = 0; f < mesh.cell_count(2); ++f) {
      const Eigen::Vector2d d(wrap_delta(centers[f][0] - x0, mesh.lx()),
                              wrap_delta(centers[f][1] - y0, mesh.ly()));
      out.values[f] = area * std::exp(-0.5 * d.dot(prec * d));
    }
  } else {
    Eigen::EigenSolver<Eigen::Matrix2d> es(point.jacobian.topLeftCorner<2, 2>());
    const Eigen::Matrix2d right = es.eigenvectors().real();
    const Eigen::Matrix2d left = right.inverse();
    const int s = es.eigenvalues()[0].real() > 0.0 ? 0 : 1;
    const double lambda = es.eigenvalues()[s].real();
    Eigen::Vector2d coord = left.row(s).transpose() * right.col(s).norm();
    const Eigen::Vector2d covector = coord.normalized();
    const int nv = mesh.cell_count(0);
    for (int e = 0; e < mesh.cell_count(1); ++e) {
      const Eigen::Vector2d d(wrap_delta(centers[e][0] - x0, mesh.lx()),
                              wrap_delta(centers[e][1] - y0, mesh.ly()));
      const double sc = coord.dot(d);
      const double g = std::exp(-lambda * sc * sc / eps);
      out.values[e] = e < nv ? mesh.spacing(0) * g * covector[0] : mesh.spacing(1) * g * covector[1];
    }
  }
  const auto star = hodge_star(mesh, out.degree, noise);
  out.values /= std::sqrt(out.values.dot(star.matrix * out.values));
  return out;
}

double star_overlap(const MeshComplex& mesh, int degree, const NoiseSpec& noise,
                    const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  const Eigen::MatrixXcd s = hodge_star(mesh, degree, noise).matrix.cast<std::complex<double>>();
  const double ab = std::abs(a.dot(s * b));
  const double aa = std::abs(a.dot(s * a));
  const double bb = std::abs(b.dot(s * b));
  return ab / std::sqrt(aa * bb);
}

InstantonScan instanton_splitting_scan(const ModelSpec& model, const std::vector<double>& epsilons) {
  if (!model.is_langevin() || model.minima < 2) {
    throw Error(ErrorCode::no_instanton, "instanton scan needs a Langevin model with at least two minima");
  }
  if (epsilons.empty()) throw Error(ErrorCode::validation, "empty epsilon list");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0)) throw Error(ErrorCode::invalid_noise, "instanton scan needs epsilon > 0");
    if (i > 0 && !(epsilons[i] < epsilons[i - 1])) {
      throw Error(ErrorCode::validation, "epsilon list must be strictly decreasing");
    }
  }
  const MeshComplex& mesh = model.mesh;
  const int dim = mesh.dimension();
  const auto betti = mesh.betti_numbers();

  const auto points = find_critical_points(mesh, model.flow).points;
  std::vector<int> morse(dim + 1, 0);
  for (const auto& p : points) ++morse[p.stable_directions];

  InstantonScan scan;
  scan.tunneling_count = morse[0] - betti[0];
  if (scan.tunneling_count < 1) {
    throw Error(ErrorCode::no_instanton, "no tunneling eigenvalue expected in degree 0");
  }
  SpectralOptions options;
  options.compute_vectors = false;
  for (double eps : epsilons) {
    const ModelSpec m = with_epsilon(model, eps);
    const auto spec = full_spectrum(assemble_hamiltonian(m.mesh, m.flow, m.noise), options);
    auto deg0 = spec.eigenvalues(0);
    std::sort(deg0.begin(), deg0.end(),
              [](const auto& l, const auto& r) { return std::abs(l) < std::abs(r); });
    InstantonRow row;
    row.epsilon = eps;
    row.splitting = deg0.at(betti[0]).real();
    row.first_non_tunneling = deg0.at(betti[0] + scan.tunneling_count).real();
    row.morse_counts = morse;
    row.near_zero_counts.assign(dim + 1, 0);
    for (const auto& e : spec.entries) {
      if (std::abs(e.value) < 0.1 * row.first_non_tunneling) ++row.near_zero_counts[e.degree];
    }
    scan.rows.push_back(row);
  }

  scan.strictly_decreasing = true;
  for (std::size_t i = 1; i < scan.rows.size(); ++i) {
    if (!(scan.rows[i].splitting < scan.rows[i - 1].splitting)) scan.strictly_decreasing = false;
  }
  scan.log_convex = scan.rows.size() >= 3;
  for (std::size_t i = 2; i < scan.rows.size(); ++i) {
    const double x0 = 1.0 / scan.rows[i - 2].epsilon;
    const double x1 = 1.0 / scan.rows[i - 1].epsilon;
    const double x2 = 1.0 / scan.rows[i].epsilon;
    const double y0 = std::log(scan.rows[i - 2].splitting);
    const double y1 = std::log(scan.rows[i - 1].splitting);
    const double y2 = std::log(scan.rows[i].splitting);
    const double dd = ((y2 - y1) / (x2 - x1) - (y1 - y0) / (x1 - x0)) / (x2 - x0);
    scan.second_differences.push_back(dd);
    if (!(dd >= 0.0)) scan.log_convex = false;
  }
  scan.weak_morse_counting = scan.rows.back().near_zero_counts == morse;
  return scan;
}

}  // namespace stochq
