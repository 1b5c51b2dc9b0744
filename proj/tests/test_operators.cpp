#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Eigenvalues>

#include "stochq/exterior_ops.hpp"
#include "stochq/fokker_planck.hpp"
#include "stochq/model_library.hpp"
#include "support.hpp"

using namespace stochq;
using testing::error_code;
using cplx = std::complex<double>;

namespace {

std::vector<cplx> eigenvalues(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  std::vector<cplx> out(es.eigenvalues().data(), es.eigenvalues().data() + m.rows());
  return out;
}

FlowField constant_flow(const MeshComplex& mesh, double ax, double ay = 0.0) {
  return FlowField::sampled(mesh, [=](double, double) { return std::array<double, 2>{ax, ay}; });
}

}  // namespace

TEST_CASE("exterior derivative squares to zero on every mesh and backend") {
  const auto circle = build_circle_grid(9, 1.0);
  const auto torus = build_torus_grid(5, 6, 1.0, 1.0);
  const auto sphere = build_triangulated_surface(icosphere(2));
  const Eigen::MatrixXd d0 = exterior_derivative(torus, 0).matrix;
  const Eigen::MatrixXd d1 = exterior_derivative(torus, 1).matrix;
  CHECK((d1 * d0).cwiseAbs().maxCoeff() == 0.0);
  CHECK((exterior_derivative(sphere, 1).matrix * exterior_derivative(sphere, 0).matrix).cwiseAbs().maxCoeff() == 0.0);
  CHECK((exterior_derivative(torus, 0, Backend::fourier).matrix - d0).norm() == 0.0);
  // Constants are closed.
  CHECK((exterior_derivative(circle, 0).matrix * Eigen::VectorXd::Ones(9)).norm() == 0.0);
  CHECK(error_code([&] { exterior_derivative(circle, 1); }) == ErrorCode::degree);
}

TEST_CASE("codifferential is the star adjoint of d") {
  const auto torus = build_torus_grid(4, 5, 2.0, 1.5);
  const NoiseSpec noise{0.7};
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  for (int k = 0; k < 2; ++k) {
    const Eigen::MatrixXd d = exterior_derivative(torus, k).matrix;
    const Eigen::MatrixXd dd = codifferential(torus, k + 1, noise).matrix;
    const Eigen::MatrixXd sk = hodge_star(torus, k, noise).matrix;
    const Eigen::MatrixXd sk1 = hodge_star(torus, k + 1, noise).matrix;
    Eigen::VectorXd a(d.cols()), b(d.rows());
    for (auto& x : a) x = normal(rng);
    for (auto& x : b) x = normal(rng);
    const double lhs = (d * a).dot(sk1 * b);
    const double rhs = a.dot(sk * (dd * b));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * (std::abs(lhs) + 1.0));
  }
}

TEST_CASE("Hamiltonian equals the anticommutator of the charges on random flows") {
  std::mt19937_64 rng(2024);
  const auto circle = build_circle_grid(32, testing::two_pi);
  const auto torus = build_torus_grid(6, 6, testing::two_pi, testing::two_pi);
  for (int trial = 0; trial < 20; ++trial) {
    const MeshComplex& mesh = trial % 2 ? torus : circle;
    const FlowField flow = testing::random_flow(mesh, rng);
    const NoiseSpec noise{0.05 + 0.1 * (trial % 5)};
    const auto q = supercharge(mesh);
    const auto qbar = pseudo_adjoint_charge(mesh, flow, noise);
    const auto anti = half_anticommutator(q, qbar);
    const auto h = assemble_hamiltonian(mesh, flow, noise);
    double diff = 0.0;
    for (int k = 0; k <= mesh.dimension(); ++k) {
      const Eigen::MatrixXd hodge = 0.5 * (k > 0 ? Eigen::MatrixXd(exterior_derivative(mesh, k - 1).matrix *
                                                                  codifferential(mesh, k, noise).matrix)
                                                 : Eigen::MatrixXd::Zero(mesh.cell_count(0), mesh.cell_count(0)));
      Eigen::MatrixXd direct = hodge - lie_derivative(mesh, flow, k).matrix;
      if (k < mesh.dimension()) {
        direct += 0.5 * codifferential(mesh, k + 1, noise).matrix * exterior_derivative(mesh, k).matrix;
      }
      diff += (anti.blocks[k] - direct).squaredNorm();
      diff += (h.blocks[k] - direct).squaredNorm();
    }
    CHECK(std::sqrt(diff) / h.norm() < 1e-11);
    CHECK(intertwining_residual(mesh, h) < 1e-11);
  }
}

TEST_CASE("Lie derivative obeys the Cartan formula and annihilates constants for divergence-free flows") {
  const auto torus = build_torus_grid(5, 5, 1.0, 1.0);
  const auto flow = constant_flow(torus, 0.3, -1.1);
  for (int k = 0; k <= 2; ++k) {
    Eigen::MatrixXd cartan = Eigen::MatrixXd::Zero(torus.cell_count(k), torus.cell_count(k));
    if (k > 0) cartan += exterior_derivative(torus, k - 1).matrix * interior_product(torus, flow, k).matrix;
    if (k < 2) cartan += interior_product(torus, flow, k + 1).matrix * exterior_derivative(torus, k).matrix;
    CHECK((cartan - lie_derivative(torus, flow, k).matrix).norm() < 1e-13);
  }
  // Constant flows contract twice to zero.
  const Eigen::MatrixXd ii = interior_product(torus, flow, 1).matrix * interior_product(torus, flow, 2).matrix;
  CHECK(ii.cwiseAbs().maxCoeff() < 1e-14);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(torus.cell_count(2));
  CHECK((lie_derivative(torus, flow, 2).matrix * ones).norm() < 1e-13);
}

TEST_CASE("finite-difference constant drive matches the discrete symbol") {
  // On a uniform grid the operator is circulant; eigenvalues are its symbol
  //   (2 eps / h^2) sin^2(k h / 2) -/+ i a sin(k h) / h.
  const int n = 40;
  const double a = 1.3, eps = 0.3;
  const auto circle = build_circle_grid(n, testing::two_pi);
  const double h = testing::two_pi / n;
  const auto op = assemble_hamiltonian(circle, constant_flow(circle, a), NoiseSpec{eps});
  std::vector<cplx> expected;
  for (int k = 0; k < n; ++k) {
    expected.emplace_back(2.0 * eps / (h * h) * std::pow(std::sin(k * h / 2), 2), -a * std::sin(k * h) / h);
  }
  for (int deg = 0; deg <= 1; ++deg) {
    const auto got = eigenvalues(op.blocks[deg]);
    CHECK(testing::multiset_distance(got, expected) < 1e-11);
    CHECK(testing::multiset_distance(expected, got) < 1e-11);
  }
}

TEST_CASE("Fourier constant drive matches the exact toy spectrum") {
  const int n = 32;
  const double a = 0.8, eps = 0.4;
  const auto circle = build_circle_grid(n, testing::two_pi);
  const auto op = assemble_hamiltonian(circle, constant_flow(circle, a), NoiseSpec{eps}, Backend::fourier);
  std::vector<cplx> expected;
  for (int k = -n / 2 + 1; k < n / 2; ++k) expected.emplace_back(eps * k * k / 2.0, -k * a);
  for (int deg = 0; deg <= 1; ++deg) {
    const auto got = eigenvalues(op.blocks[deg]);
    // The Nyquist mode is real in a real basis; every other mode is exact.
    for (const auto& e : expected) {
      double best = INFINITY;
      for (const auto& g : got) best = std::min(best, std::abs(g - e));
      CHECK(best <= 1e-11 * std::max(1.0, std::abs(e)));
    }
  }
}

TEST_CASE("Fourier and finite-difference operators converge to each other at second order") {
  const double a = 1.0, eps = 0.2;
  double previous = 0.0;
  for (int n : {32, 64}) {
    const auto circle = build_circle_grid(n, testing::two_pi);
    const auto fd = eigenvalues(assemble_hamiltonian(circle, constant_flow(circle, a), NoiseSpec{eps}).blocks[0]);
    // Lowest nontrivial mode k = 1: eps/2 - i a.
    double best = INFINITY;
    for (const auto& g : fd) best = std::min(best, std::abs(g - cplx(eps / 2, -a)));
    if (previous > 0.0) CHECK(previous / best == doctest::Approx(4.0).epsilon(0.02));
    previous = best;
  }
}

TEST_CASE("conventional Fokker-Planck operator is the top block up to the Hodge star") {
  std::mt19937_64 rng(5);
  const auto circle = build_circle_grid(24, testing::two_pi);
  const auto torus = build_torus_grid(5, 6, testing::two_pi, 3.0);
  for (const MeshComplex* m : {&circle, &torus}) {
    const NoiseSpec noise{0.35};
    const FlowField flow = testing::random_flow(*m, rng, 2);
    const int top = m->dimension();
    const auto h = assemble_hamiltonian(*m, flow, noise);
    const auto star = hodge_star(*m, top, noise);
    const Eigen::MatrixXd similar = star.matrix * h.blocks[top] * star.inverse();
    const Eigen::MatrixXd fp = conventional_fp_operator(*m, flow, noise).matrix;
    CHECK((fp - similar).norm() <= 1e-12 * fp.norm());
    // Probability conservation: columns of the density operator sum to zero
    // against the cell volumes.
    const Eigen::VectorXd vol = m->primal_volumes(top);
    const Eigen::VectorXd leak = fp.transpose() * vol;
    CHECK(leak.cwiseAbs().maxCoeff() <= 1e-12 * fp.norm());
  }
  const auto fourier = conventional_fp_operator(circle, constant_flow(circle, 1.0), NoiseSpec{0.2}, Backend::fourier);
  CHECK(fourier.matrix.rows() == 24);
  CHECK(error_code([&] { conventional_fp_operator(torus, constant_flow(torus, 1.0, 0.0), NoiseSpec{0.2}, Backend::fourier); }) ==
        ErrorCode::unsupported_backend);
}

TEST_CASE("deterministic limit") {
  const auto circle = build_circle_grid(16, testing::two_pi);
  const auto flow = constant_flow(circle, 1.0);
  CHECK(error_code([&] { assemble_hamiltonian(circle, flow, NoiseSpec{0.0}); }) == ErrorCode::deterministic_limit);
  const auto gen = deterministic_generator(circle, flow);
  for (int k = 0; k <= 1; ++k) CHECK((gen.blocks[k] + lie_derivative(circle, flow, k).matrix).norm() == 0.0);
  // Zero flow at zero noise: the unit-metric Laplacian.
  const auto lap = assemble_hamiltonian(circle, FlowField::zero(circle), NoiseSpec{0.0});
  const auto unit = assemble_hamiltonian(circle, FlowField::zero(circle), NoiseSpec{1.0});
  CHECK((lap.blocks[0] - unit.blocks[0]).norm() == 0.0);
  // A Langevin flow keeps its shape in the limit.
  const auto model = langevin_double_well_circle(1.0, 0.2, 16);
  CHECK(deterministic_generator(model.mesh, model.flow).blocks.size() == 2);
}

TEST_CASE("ghost number is conserved and charges shift degree by one") {
  const auto torus = build_torus_grid(4, 4, 1.0, 1.0);
  const auto flow = constant_flow(torus, 0.2, 0.5);
  const NoiseSpec noise{0.5};
  const auto h = assemble_hamiltonian(torus, flow, noise);
  for (int k = 0; k <= 2; ++k) {
    CHECK(h.block(k).rows() == torus.cell_count(k));
    CHECK(h.block(k).cols() == torus.cell_count(k));
  }
  const auto q = supercharge(torus);
  const auto qbar = pseudo_adjoint_charge(torus, flow, noise);
  CHECK(q.shift == 1);
  CHECK(qbar.shift == -1);
  CHECK(q.block(1).rows() == torus.cell_count(2));
  CHECK(qbar.block(2).rows() == torus.cell_count(1));
  CHECK(error_code([&] { q.block(2); }) == ErrorCode::degree);
  CHECK(error_code([&] { qbar.block(0); }) == ErrorCode::degree);
}

TEST_CASE("Langevin double well hermitianizes to a symmetric operator") {
  const auto m = langevin_double_well_circle(1.0, 0.2, 64);
  const auto hl = hermitianize_langevin(m.mesh, m.flow, m.noise);
  CHECK(hl.asymmetry < 1e-10);
  for (int k = 0; k <= 1; ++k) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (hl.hamiltonian.blocks[k] + hl.hamiltonian.blocks[k].transpose()));
    const double radius = es.eigenvalues().cwiseAbs().maxCoeff();
    CHECK(es.eigenvalues().minCoeff() >= -1e-9 * radius);
  }
  const auto sine = sine_flow_circle(1.0, 0.2, 16);
  CHECK(error_code([&] { hermitianize_langevin(sine.mesh, sine.flow, sine.noise); }) == ErrorCode::not_potential);
  const auto egg = langevin_egg_crate_torus(1.0, 0.2, 6);
  CHECK(error_code([&] { hermitianize_langevin(egg.mesh, egg.flow, egg.noise); }) == ErrorCode::unsupported_mesh);
}

TEST_CASE("a flow declared Langevin must match its superpotential") {
  const auto m = langevin_double_well_circle(1.0, 0.2, 16);
  FlowField broken = m.flow;
  broken.samples(3, 0) += 0.1;
  CHECK(error_code([&] { validate_flow(m.mesh, broken, m.noise); }) == ErrorCode::not_potential);
  FlowField wrong_shape{Eigen::MatrixXd::Zero(15, 1), std::nullopt};
  CHECK(error_code([&] { assemble_hamiltonian(m.mesh, wrong_shape, m.noise); }) == ErrorCode::invalid_argument);
}

TEST_CASE("codifferential squares to zero and d commutes with the Lie derivative on library flows") {
  for (const auto& info : available_models()) {
    const auto m = make_model(info.name, {});
    const int dim = m.mesh.dimension();
    double scale = 0.0;
    for (int k = 0; k <= dim; ++k) scale = std::max(scale, codifferential(m.mesh, std::max(k, 1), m.noise).matrix.norm());
    if (dim == 2) {
      const Eigen::MatrixXd dd = codifferential(m.mesh, 1, m.noise).matrix * codifferential(m.mesh, 2, m.noise).matrix;
      CHECK(dd.norm() <= 1e-12 * scale * scale);
    }
    if (!m.mesh.is_structured()) continue;
    for (int k = 0; k < dim; ++k) {
      const Eigen::MatrixXd d = exterior_derivative(m.mesh, k).matrix;
      const Eigen::MatrixXd comm = d * lie_derivative(m.mesh, m.flow, k).matrix -
                                   lie_derivative(m.mesh, m.flow, k + 1).matrix * d;
      CHECK(comm.norm() <= 1e-12 * std::max(1.0, lie_derivative(m.mesh, m.flow, k).matrix.norm()));
    }
  }
}

TEST_CASE("both backends share the exterior derivative on the circle") {
  const auto circle = build_circle_grid(24, testing::two_pi);
  CHECK((exterior_derivative(circle, 0, Backend::fourier).matrix - exterior_derivative(circle, 0).matrix).norm() == 0.0);
  // Metric-dependent pieces differ at O(h^2) for finite differences; on a
  // band-limited cochain the Fourier star is exact.
  const auto ft = hodge_star(circle, 1, NoiseSpec{1.0}, Backend::fourier);
  const double h = testing::two_pi / 24;
  Eigen::VectorXd edge(24);
  for (int e = 0; e < 24; ++e) edge[e] = std::sin((e + 1) * h) - std::sin(e * h);  // d of sin at k = 1
  const Eigen::VectorXd dual = ft.matrix * edge;
  // The dual 0-cochain of d sin is cos sampled at vertices... up to the star
  // convention, it must be a pure k = 1 mode.
  Eigen::VectorXcd coeffs = Eigen::VectorXcd::Zero(24);
  for (int k = 0; k < 24; ++k) {
    for (int j = 0; j < 24; ++j) coeffs[k] += dual[j] * std::polar(1.0, -testing::two_pi * k * j / 24);
  }
  double leak = 0.0;
  for (int k = 2; k <= 22; ++k) leak = std::max(leak, std::abs(coeffs[k]));
  CHECK(leak < 1e-12 * std::abs(coeffs[1]));
}
