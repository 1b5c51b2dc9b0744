#include "periodic_symbols.hpp"

#include <cmath>
#include <numbers>

namespace stochq::detail {

namespace {

constexpr std::complex<double> I{0.0, 1.0};

double phase(int m, int n) { return 2.0 * std::numbers::pi * m / n; }

}  // namespace

Eigen::MatrixXd circulant(int n, const Symbol& symbol) {
  std::vector<std::complex<double>> sigma;
  sigma.reserve(n);
  for (int m = min_mode(n); m <= max_mode(n); ++m) {
    auto s = symbol(m);
    if (is_nyquist(m, n)) s = s.real();
    sigma.push_back(s);
  }
  Eigen::VectorXd column(n);
  for (int d = 0; d < n; ++d) {
    std::complex<double> acc = 0.0;
    int idx = 0;
    for (int m = min_mode(n); m <= max_mode(n); ++m, ++idx) {
      acc += sigma[idx] * std::exp(I * (phase(m, n) * d));
    }
    column[d] = acc.real() / n;
  }
  Eigen::MatrixXd out(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) out(a, b) = column[((a - b) % n + n) % n];
  }
  return out;
}

double wavenumber(int m, int n, double length) {
  (void)n;
  return 2.0 * std::numbers::pi * m / length;
}

std::complex<double> vertex_to_dual_integral(int m, int n, double length) {
  const double h = length / n;
  if (m == 0) return h;
  const double k = wavenumber(m, n, length);
  return 2.0 * std::sin(phase(m, n) / 2.0) / k;
}

std::complex<double> edge_integral_to_midpoint(int m, int n, double length) {
  const double h = length / n;
  if (m == 0) return 1.0 / h;
  const double k = wavenumber(m, n, length);
  return k / (2.0 * std::sin(phase(m, n) / 2.0));
}

std::complex<double> edge_integral_to_vertex(int m, int n, double length) {
  const double h = length / n;
  if (m == 0) return 1.0 / h;
  const double k = wavenumber(m, n, length);
  return I * k / (std::exp(I * phase(m, n)) - 1.0);
}

std::complex<double> vertex_to_edge_integral(int m, int n, double length) {
  const double h = length / n;
  if (m == 0) return h;
  const double k = wavenumber(m, n, length);
  return (std::exp(I * phase(m, n)) - 1.0) / (I * k);
}

std::complex<double> midpoint_to_vertex(int m, int n, double /*length*/) {
  return std::exp(-I * (phase(m, n) / 2.0));
}

std::complex<double> vertex_to_midpoint_derivative(int m, int n, double length) {
  return I * wavenumber(m, n, length) * std::exp(I * (phase(m, n) / 2.0));
}

std::complex<double> midpoint_to_vertex_derivative(int m, int n, double length) {
  return I * wavenumber(m, n, length) * std::exp(-I * (phase(m, n) / 2.0));
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& slow, const Eigen::MatrixXd& fast) {
  Eigen::MatrixXd out(slow.rows() * fast.rows(), slow.cols() * fast.cols());
  for (Eigen::Index a = 0; a < slow.rows(); ++a) {
    for (Eigen::Index b = 0; b < slow.cols(); ++b) {
      out.block(a * fast.rows(), b * fast.cols(), fast.rows(), fast.cols()) =
          slow(a, b) * fast;
    }
  }
  return out;
}

}  // namespace stochq::detail
