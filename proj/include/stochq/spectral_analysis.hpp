#pragma once

#include <complex>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stochq/fokker_planck.hpp"

namespace stochq {

struct SpectrumEntry {
  int degree = 0;
  std::complex<double> value;
  // Empty for synthetic spectra.
  Eigen::VectorXcd right;
  Eigen::VectorXcd left;
  // max_m |<<n|m>> - delta_nm| over the entry's degree block.
  double biorth_residual = 0.0;

  double gamma() const { return value.real(); }
  double energy() const { return value.imag(); }
};

// Eigenpairs of every degree block, ordered lexicographically by
// (Γ, E, degree). Left and right vectors satisfy left_n^T right_m = δ_nm.
struct SpectrumReport {
  std::vector<SpectrumEntry> entries;
  double spectral_radius = 0.0;
  std::vector<int> block_sizes;
  double max_biorth_residual = 0.0;
  bool has_vectors = false;
  std::vector<std::string> warnings;

  int dimension() const { return static_cast<int>(block_sizes.size()) - 1; }
  std::vector<std::complex<double>> eigenvalues(int degree) const;
  // Default tolerance: 1e-8 * spectral radius.
  double default_tolerance() const;
};

struct SpectralOptions {
  int size_cap = 8192;
  // Relative (to the spectral radius) separation below which eigenvalues are
  // bi-orthonormalized jointly.
  double cluster_tolerance = 1e-7;
  bool compute_vectors = true;
  bool parallel = true;
};

SpectrumReport full_spectrum(const GradedOperator& op, const SpectralOptions& options = {});

// A report holding only eigenvalues; all in degree 0 unless degrees are given.
SpectrumReport synthetic_spectrum(const std::vector<std::complex<double>>& values,
                                  const std::vector<int>& degrees = {});

// Entries with |Γ| <= tau_gamma; throws ergodic-zero-missing if none.
std::vector<SpectrumEntry> physical_states(const SpectrumReport& spec, double tau_gamma);

enum class PhaseVerdict { unbroken, q_broken, indeterminate };

const char* to_string(PhaseVerdict verdict);

struct PhaseClassification {
  PhaseVerdict verdict = PhaseVerdict::indeterminate;
  double tau_gamma = 0.0;
  double tau_energy = 0.0;
  // Eigenvalues with |Γ| <= tau_gamma, with their degrees.
  std::vector<std::complex<double>> evidence;
  std::vector<int> evidence_degrees;
  int witten_index = 0;
};

// Pure function of the eigenvalue multiset.
PhaseVerdict classify_eigenvalues(const std::vector<std::complex<double>>& values, double tau_gamma,
                                  double tau_energy);

PhaseClassification classify_phase(const SpectrumReport& spec, double tau_gamma, double tau_energy);

struct WittenIndex {
  int index = 0;
  std::vector<int> zero_modes;  // per degree
  double tau = 0.0;
  bool gap_ambiguity = false;
  std::vector<std::string> warnings;
};

WittenIndex witten_index(const SpectrumReport& spec, double tau0);

struct PairingReport {
  int pairs = 0;
  // pair_id per entry of the report, -1 when the entry is a zero mode or unpaired.
  std::vector<int> pair_id;
  std::vector<std::size_t> unpaired;
  double max_mismatch = 0.0;
  double tolerance = 0.0;
  // On one-dimensional meshes: nonzero spectra of degrees 0 and 1 agree as multisets.
  bool multiset_equal = false;
};

// Greedy pairing of each nonzero eigenvalue with the nearest unused eigenvalue
// one degree up, for degrees 0..D-1 in turn. Values count as zero when
// |λ| <= tau0; tol is relative to the spectral radius.
PairingReport susy_pairing_check(const SpectrumReport& spec, double tol, double tau0);

// Largest distance from a conjugated eigenvalue to the nearest eigenvalue of
// the same degree, relative to the spectral radius.
double conjugate_closure_defect(const SpectrumReport& spec);

// CSV: degree,index,gamma,e,pair_id,physical_flag
void write_spectrum_csv(const std::filesystem::path& path, const SpectrumReport& spec,
                        const PairingReport& pairing, double tau_gamma);

}  // namespace stochq
