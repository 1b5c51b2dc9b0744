#pragma once

#include <Eigen/Dense>

#include "stochq/flow_field.hpp"
#include "stochq/mesh_complex.hpp"

namespace stochq {

// Linear map between cochain spaces of the given degrees.
struct OperatorBlock {
  Eigen::MatrixXd matrix;
  int domain_degree = 0;
  int codomain_degree = 0;
  Backend backend = Backend::finite_difference;
};

// d_k : k-cochains -> (k+1)-cochains, the transposed signed incidence matrix.
// Metric-free, identical for both backends.
OperatorBlock exterior_derivative(const MeshComplex& mesh, int k,
                                  Backend backend = Backend::finite_difference);

// d†_k = star_{k-1}^{-1} d_{k-1}^T star_k : k-cochains -> (k-1)-cochains.
OperatorBlock codifferential(const MeshComplex& mesh, int k, const NoiseSpec& noise,
                             Backend backend = Backend::finite_difference);

// Contraction ι_A : k-cochains -> (k-1)-cochains.
//
// Finite differences contract at vertices with the average of the incident
// edges (and, for 2-forms, the average of the two faces sharing an edge, with
// the flow averaged onto the edge). The Fourier backend contracts exact point
// values of the trigonometric interpolant.
OperatorBlock interior_product(const MeshComplex& mesh, const FlowField& flow, int k,
                               Backend backend = Backend::finite_difference);

// Cartan form L_A = d ι_A + ι_A d on k-cochains.
OperatorBlock lie_derivative(const MeshComplex& mesh, const FlowField& flow, int k,
                             Backend backend = Backend::finite_difference);

}  // namespace stochq
