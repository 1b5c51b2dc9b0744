#pragma once

// Exact Fourier symbols for uniform periodic 1-D grids, shared by the
// Fourier backend of the Hodge star, interior product and conventional
// Fokker-Planck operator.
//
// Cochain conventions on a grid of n cells with spacing h = L/n:
//   vertex cochains  -> point values at x_i = i h
//   edge cochains    -> integrals over [x_i, x_i + h] (indexed by tail vertex)
// Every operator is circulant in the cell index, so it is fixed by its symbol
// on the modes exp(2 pi i m j / n), m in (-n/2, n/2].

#include <complex>
#include <functional>

#include <Eigen/Dense>

namespace stochq::detail {

using Symbol = std::function<std::complex<double>(int m)>;

inline int min_mode(int n) { return -((n - 1) / 2); }
inline int max_mode(int n) { return n / 2; }
inline bool is_nyquist(int m, int n) { return n % 2 == 0 && m == n / 2; }

// Real circulant matrix with the given symbol. The Nyquist mode of an even
// grid is one-dimensional in real arithmetic, so only the real part of its
// symbol is kept there.
Eigen::MatrixXd circulant(int n, const Symbol& symbol);

// Physical wavenumber of mode m.
double wavenumber(int m, int n, double length);

// Vertex point values -> integrals over the dual cell [x_i - h/2, x_i + h/2].
std::complex<double> vertex_to_dual_integral(int m, int n, double length);
// Edge integrals -> point values at the edge midpoint.
std::complex<double> edge_integral_to_midpoint(int m, int n, double length);
// Edge integrals -> point values at the tail vertex.
std::complex<double> edge_integral_to_vertex(int m, int n, double length);
// Vertex point values -> edge integrals.
std::complex<double> vertex_to_edge_integral(int m, int n, double length);
// Midpoint point values -> vertex point values (half-cell shift back).
std::complex<double> midpoint_to_vertex(int m, int n, double length);
// d/dx from vertex point values to midpoint point values.
std::complex<double> vertex_to_midpoint_derivative(int m, int n, double length);
// d/dx from midpoint point values to vertex point values.
std::complex<double> midpoint_to_vertex_derivative(int m, int n, double length);

// Kronecker product with the first factor acting on the slow (j) index.
Eigen::MatrixXd kron(const Eigen::MatrixXd& slow, const Eigen::MatrixXd& fast);

}  // namespace stochq::detail
