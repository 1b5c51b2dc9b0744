#pragma once

#include <vector>

#include <Eigen/Dense>

#include "stochq/exterior_ops.hpp"
#include "stochq/flow_field.hpp"
#include "stochq/mesh_complex.hpp"

namespace stochq {

// Degree-diagonal operator: blocks[k] acts on k-cochains, k = 0..D. Ghost
// number (form degree) is conserved by construction.
struct GradedOperator {
  std::vector<Eigen::MatrixXd> blocks;
  double epsilon = 0.0;
  Backend backend = Backend::finite_difference;
  MeshKind mesh_kind = MeshKind::circle;

  int dimension() const { return static_cast<int>(blocks.size()) - 1; }
  const Eigen::MatrixXd& block(int k) const;
  int total_size() const;
  // Frobenius norm over all blocks.
  double norm() const;
};

// Degree-shifting operator. blocks[k] acts on k-cochains and maps them to
// degree k + shift; degrees without a target hold an empty matrix.
struct ChargeOperator {
  std::vector<Eigen::MatrixXd> blocks;
  int shift = 1;

  const Eigen::MatrixXd& block(int k) const;
};

// The exterior derivative Q = d as a charge operator.
ChargeOperator supercharge(const MeshComplex& mesh, Backend backend = Backend::finite_difference);

// Q̄_k = d†_k - 2 ι_A on degrees 1..D.
ChargeOperator pseudo_adjoint_charge(const MeshComplex& mesh, const FlowField& flow,
                                     const NoiseSpec& noise,
                                     Backend backend = Backend::finite_difference);

// ½ (Q Q̄ + Q̄ Q), block by block.
GradedOperator half_anticommutator(const ChargeOperator& q, const ChargeOperator& qbar);

// H_k = ½ (d d† + d† d) - L_A. The result is cross-checked against
// ½[Q, Q̄]₊ to 1e-11 relative; a mismatch raises a numerical error.
//
// epsilon = 0 is accepted only with a zero flow (unit-metric Laplacian); with
// a nonzero flow it is a deterministic-limit error, see
// deterministic_generator().
GradedOperator assemble_hamiltonian(const MeshComplex& mesh, const FlowField& flow,
                                    const NoiseSpec& noise,
                                    Backend backend = Backend::finite_difference);

// epsilon = 0 limit of the Hamiltonian: -L_A on every degree.
GradedOperator deterministic_generator(const MeshComplex& mesh, const FlowField& flow,
                                       Backend backend = Backend::finite_difference);

// Conventional Fokker-Planck operator on densities sampled at top-cell
// centers, assembled directly in flux (divergence) form. Equal to
// star_D H_D star_D^{-1}.
OperatorBlock conventional_fp_operator(const MeshComplex& mesh, const FlowField& flow,
                                       const NoiseSpec& noise,
                                       Backend backend = Backend::finite_difference);

struct HermitianizedLangevin {
  GradedOperator hamiltonian;
  // Superpotential transported to the k-cells; the similarity metric of
  // degree k is eta_k = diag(exp(2 W_k)).
  std::vector<Eigen::VectorXd> cell_superpotential;
  // max_k |H_L - H_L^T|_F / |H_L|_F
  double asymmetry = 0.0;
};

// H_L = eta^{1/2} H eta^{-1/2} for a Langevin flow on a finite-difference
// circle grid.
HermitianizedLangevin hermitianize_langevin(const MeshComplex& mesh, const FlowField& flow,
                                            const NoiseSpec& noise);

// max_k |d_k H_k - H_{k+1} d_k|_F / |H|_F
double intertwining_residual(const MeshComplex& mesh, const GradedOperator& h);

}  // namespace stochq
