#include "stochq/spectral_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "format.hpp"
#include "stochq/error.hpp"

namespace stochq {

namespace {

using cd = std::complex<double>;

struct BlockResult {
  Eigen::VectorXcd values;
  Eigen::MatrixXcd right;
  Eigen::MatrixXcd left;
  double residual = 0.0;
  std::vector<std::string> warnings;
};

double biorth_defect(const Eigen::MatrixXcd& left, const Eigen::MatrixXcd& right) {
  const Eigen::MatrixXcd g = left.transpose() * right;
  return (g - Eigen::MatrixXcd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

std::vector<int> cluster_labels(const Eigen::VectorXcd& values, double tol) {
  const int n = static_cast<int>(values.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (std::abs(values[i] - values[j]) <= tol) parent[find(i)] = find(j);
    }
  }
  std::vector<int> label(n);
  for (int i = 0; i < n; ++i) label[i] = find(i);
  return label;
}

// Diagonal symmetrization: returns d such that diag(d)^-1 a diag(d) has
// |a_ij| = |a_ji| in the least-squares sense over the log magnitudes of the
// mutually coupled pairs. Exact when a is diagonally similar to a symmetric
// matrix, as for gradient flows.
Eigen::VectorXd balance(Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  const double floor = 1e-14 * a.cwiseAbs().maxCoeff();
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  bool coupled = false;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double aij = std::abs(a(i, j));
      const double aji = std::abs(a(j, i));
      if (aij <= floor || aji <= floor) continue;
      const double g = 0.5 * std::log(aij / aji);
      if (g != 0.0) coupled = true;
      lap(i, i) += 1.0;
      lap(j, j) += 1.0;
      lap(i, j) -= 1.0;
      lap(j, i) -= 1.0;
      rhs[i] += g;
      rhs[j] -= g;
    }
  }
  if (!coupled) return Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd x = lap.completeOrthogonalDecomposition().solve(rhs);
  const Eigen::VectorXd d = x.array().exp();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) a(i, j) *= d[j] / d[i];
  }
  return d;
}

// Inverse iteration on the original block for clusters whose vectors lost
// accuracy in the balanced basis (components spanning more range than double
// precision resolves after the similarity). Returns true if anything changed.
bool refine_vectors(const Eigen::MatrixXd& a, const Eigen::VectorXcd& values, const std::vector<int>& label,
                    Eigen::MatrixXcd& vecs, double radius) {
  const Eigen::Index n = a.rows();
  const Eigen::MatrixXcd ac = a.cast<cd>();
  const double tol = 1e-10 * std::max(radius, 1e-300);
  auto residual = [&](Eigen::Index c) {
    return (ac * vecs.col(c) - values[c] * vecs.col(c)).norm() / vecs.col(c).norm();
  };
  bool changed = false;
  std::vector<bool> seen(n, false);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (seen[j]) continue;
    std::vector<Eigen::Index> cols;
    for (Eigen::Index i = j; i < n; ++i) {
      if (label[i] == label[j]) {
        cols.push_back(i);
        seen[i] = true;
      }
    }
    bool bad = false;
    for (auto c : cols) bad = bad || !(residual(c) <= tol);
    if (!bad) continue;
    const Eigen::Index m = static_cast<Eigen::Index>(cols.size());
    cd shift = 0.0;
    for (auto c : cols) shift += values[c];
    shift = shift / static_cast<double>(m) + cd(1e-12 * radius, 0.0);
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(ac - shift * Eigen::MatrixXcd::Identity(n, n));
    Eigen::MatrixXcd x(n, m);
    for (Eigen::Index c = 0; c < m; ++c) x.col(c) = vecs.col(cols[c]);
    for (int it = 0; it < 3; ++it) {
      x = lu.solve(x);
      if (!x.allFinite()) break;
      x = Eigen::HouseholderQR<Eigen::MatrixXcd>(x).householderQ() * Eigen::MatrixXcd::Identity(n, m);
    }
    if (!x.allFinite()) continue;
    if (m > 1) {
      // Rayleigh-Ritz within the cluster subspace.
      const Eigen::ComplexEigenSolver<Eigen::MatrixXcd> ritz(x.adjoint() * ac * x);
      const Eigen::MatrixXcd y = x * ritz.eigenvectors();
      std::vector<bool> used(m, false);
      for (Eigen::Index c = 0; c < m; ++c) {
        Eigen::Index best = -1;
        for (Eigen::Index t = 0; t < m; ++t) {
          if (!used[t] && (best < 0 || std::abs(ritz.eigenvalues()[t] - values[cols[c]]) <
                                           std::abs(ritz.eigenvalues()[best] - values[cols[c]]))) {
            best = t;
          }
        }
        used[best] = true;
        x.col(c) = y.col(best).normalized();
      }
    }
    for (Eigen::Index c = 0; c < m; ++c) vecs.col(cols[c]) = x.col(c);
    changed = true;
  }
  return changed;
}

// Cluster-local solve L <- L M^{-T}, M = L^T R, for column-aligned pairs.
bool biorthonormalize_aligned(const std::vector<int>& label, const Eigen::MatrixXcd& right, Eigen::MatrixXcd& left) {
  const Eigen::Index n = right.cols();
  std::vector<bool> seen(n, false);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (seen[j]) continue;
    std::vector<Eigen::Index> cols;
    for (Eigen::Index i = j; i < n; ++i) {
      if (label[i] == label[j]) {
        cols.push_back(i);
        seen[i] = true;
      }
    }
    const Eigen::Index m = static_cast<Eigen::Index>(cols.size());
    Eigen::MatrixXcd rmat(right.rows(), m), lmat(left.rows(), m);
    for (Eigen::Index c = 0; c < m; ++c) {
      rmat.col(c) = right.col(cols[c]);
      lmat.col(c) = left.col(cols[c]);
    }
    const Eigen::FullPivLU<Eigen::MatrixXcd> lu(lmat.transpose() * rmat);
    if (!lu.isInvertible()) return false;
    const Eigen::MatrixXcd fixed = lu.solve(lmat.transpose()).transpose();
    for (Eigen::Index c = 0; c < m; ++c) left.col(cols[c]) = fixed.col(c);
  }
  return true;
}

BlockResult decompose(const Eigen::MatrixXd& input, int degree, const SpectralOptions& options) {
  BlockResult out;
  const Eigen::Index n = input.rows();
  if (n == 0) return out;
  Eigen::MatrixXd h = input;
  const Eigen::VectorXd scale = balance(h);
  Eigen::EigenSolver<Eigen::MatrixXd> es(h, options.compute_vectors);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::numerical, "eigensolver did not converge on the degree-" +
                                          std::to_string(degree) + " block");
  }
  out.values = es.eigenvalues();
  if (!options.compute_vectors) return out;

  out.right = es.eigenvectors();
  for (Eigen::Index j = 0; j < n; ++j) out.right.col(j).normalize();

  Eigen::EigenSolver<Eigen::MatrixXd> lt(h.transpose(), true);
  if (lt.info() != Eigen::Success) {
    throw Error(ErrorCode::numerical, "left eigensolver did not converge on the degree-" +
                                          std::to_string(degree) + " block");
  }
  const Eigen::VectorXcd lvals = lt.eigenvalues();
  const Eigen::MatrixXcd lraw = lt.eigenvectors();

  const double radius = out.values.cwiseAbs().maxCoeff();
  const double tol = options.cluster_tolerance * std::max(radius, 1e-300);
  const std::vector<int> label = cluster_labels(out.values, tol);

  // Each left vector joins the cluster of the nearest right eigenvalue.
  std::vector<int> left_label(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best = 0;
    (out.values.array() - lvals[i]).abs().minCoeff(&best);
    left_label[i] = label[best];
  }

  out.left = Eigen::MatrixXcd::Zero(n, n);
  bool matched = true;
  std::vector<int> roots(label.begin(), label.end());
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
  for (int root : roots) {
    std::vector<Eigen::Index> rc, lc;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (label[i] == root) rc.push_back(i);
      if (left_label[i] == root) lc.push_back(i);
    }
    if (rc.size() != lc.size()) {
      matched = false;
      break;
    }
    const Eigen::Index m = static_cast<Eigen::Index>(rc.size());
    Eigen::MatrixXcd rmat(n, m), lmat(n, m);
    for (Eigen::Index c = 0; c < m; ++c) {
      rmat.col(c) = out.right.col(rc[c]);
      lmat.col(c) = lraw.col(lc[c]);
    }
    // Cluster-local solve: L <- L M^{-T}, M = L^T R.
    const Eigen::MatrixXcd gram = lmat.transpose() * rmat;
    const Eigen::FullPivLU<Eigen::MatrixXcd> lu(gram);
    if (!lu.isInvertible()) {
      matched = false;
      break;
    }
    const Eigen::MatrixXcd fixed = lu.solve(lmat.transpose()).transpose();
    for (Eigen::Index c = 0; c < m; ++c) out.left.col(rc[c]) = fixed.col(c);
  }

  double residual = matched ? biorth_defect(out.left, out.right) : INFINITY;
  if (residual > 1e-8) {
    const Eigen::MatrixXcd inv = out.right.fullPivLu().inverse().transpose();
    const double inv_residual = biorth_defect(inv, out.right);
    if (inv_residual < residual) {
      out.left = inv;
      out.warnings.push_back("degree " + std::to_string(degree) +
                             ": left vectors taken from the inverse eigenvector matrix");
    }
  }

  // Undo the balancing similarity; rescaling pairs keeps L^T R fixed.
  out.right = scale.asDiagonal() * out.right;
  out.left = scale.cwiseInverse().asDiagonal() * out.left;
  const bool refined_right = refine_vectors(input, out.values, label, out.right, radius);
  const bool refined_left = refine_vectors(input.transpose(), out.values, label, out.left, radius);
  if ((refined_right || refined_left) && !biorthonormalize_aligned(label, out.right, out.left)) {
    out.warnings.push_back("degree " + std::to_string(degree) +
                           ": refined left and right vectors are not dual within a cluster");
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    const double norm = out.right.col(j).norm();
    out.right.col(j) /= norm;
    out.left.col(j) *= norm;
  }
  out.residual = biorth_defect(out.left, out.right);
  return out;
}

}  // namespace

std::vector<std::complex<double>> SpectrumReport::eigenvalues(int degree) const {
  std::vector<cd> out;
  for (const auto& e : entries) {
    if (e.degree == degree) out.push_back(e.value);
  }
  return out;
}

double SpectrumReport::default_tolerance() const { return 1e-8 * spectral_radius; }

SpectrumReport full_spectrum(const GradedOperator& op, const SpectralOptions& options) {
  const int total = op.total_size();
  if (total > options.size_cap) {
    std::string sizes;
    for (const auto& b : op.blocks) sizes += (sizes.empty() ? "" : ", ") + std::to_string(b.rows());
    throw Error(ErrorCode::capacity, "operator has " + std::to_string(total) +
                                         " unknowns (blocks " + sizes + "), cap is " +
                                         std::to_string(options.size_cap));
  }
  const int dim = op.dimension();
  std::vector<BlockResult> blocks(dim + 1);
  if (options.parallel && dim > 0) {
    std::vector<std::future<BlockResult>> jobs;
    for (int k = 0; k <= dim; ++k) {
      jobs.push_back(std::async(std::launch::async,
                                [&, k] { return decompose(op.blocks[k], k, options); }));
    }
    for (int k = 0; k <= dim; ++k) blocks[k] = jobs[k].get();
  } else {
    for (int k = 0; k <= dim; ++k) blocks[k] = decompose(op.blocks[k], k, options);
  }

  SpectrumReport report;
  report.has_vectors = options.compute_vectors;
  for (int k = 0; k <= dim; ++k) {
    const auto& b = blocks[k];
    report.block_sizes.push_back(static_cast<int>(op.blocks[k].rows()));
    report.max_biorth_residual = std::max(report.max_biorth_residual, b.residual);
    report.warnings.insert(report.warnings.end(), b.warnings.begin(), b.warnings.end());
    for (Eigen::Index i = 0; i < b.values.size(); ++i) {
      SpectrumEntry e;
      e.degree = k;
      e.value = b.values[i];
      if (options.compute_vectors) {
        e.right = b.right.col(i);
        e.left = b.left.col(i);
        e.biorth_residual = b.residual;
      }
      report.spectral_radius = std::max(report.spectral_radius, std::abs(e.value));
      report.entries.push_back(std::move(e));
    }
  }
  std::stable_sort(report.entries.begin(), report.entries.end(),
                   [](const SpectrumEntry& a, const SpectrumEntry& b) {
                     if (a.gamma() != b.gamma()) return a.gamma() < b.gamma();
                     if (a.energy() != b.energy()) return a.energy() < b.energy();
                     return a.degree < b.degree;
                   });
  return report;
}

SpectrumReport synthetic_spectrum(const std::vector<std::complex<double>>& values,
                                  const std::vector<int>& degrees) {
  if (!degrees.empty() && degrees.size() != values.size()) {
    throw Error(ErrorCode::invalid_argument, "degrees must match values in length");
  }
  SpectrumReport report;
  int dim = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const int k = degrees.empty() ? 0 : degrees[i];
    if (k < 0) throw Error(ErrorCode::degree, "negative degree in synthetic spectrum");
    dim = std::max(dim, k);
    SpectrumEntry e;
    e.degree = k;
    e.value = values[i];
    report.spectral_radius = std::max(report.spectral_radius, std::abs(e.value));
    report.entries.push_back(e);
  }
  report.block_sizes.assign(dim + 1, 0);
  for (const auto& e : report.entries) ++report.block_sizes[e.degree];
  std::stable_sort(report.entries.begin(), report.entries.end(),
                   [](const SpectrumEntry& a, const SpectrumEntry& b) {
                     if (a.gamma() != b.gamma()) return a.gamma() < b.gamma();
                     if (a.energy() != b.energy()) return a.energy() < b.energy();
                     return a.degree < b.degree;
                   });
  return report;
}

std::vector<SpectrumEntry> physical_states(const SpectrumReport& spec, double tau_gamma) {
  if (!(tau_gamma > 0.0)) throw Error(ErrorCode::invalid_argument, "tau_gamma must be positive");
  std::vector<SpectrumEntry> out;
  for (const auto& e : spec.entries) {
    if (std::abs(e.gamma()) <= tau_gamma) out.push_back(e);
  }
  if (out.empty()) {
    throw Error(ErrorCode::ergodic_zero_missing,
                "no eigenvalue with |gamma| <= " + detail::sci(tau_gamma) +
                    "; the discretization lost the stationary state");
  }
  return out;
}

const char* to_string(PhaseVerdict verdict) {
  switch (verdict) {
    case PhaseVerdict::unbroken: return "unbroken-Markovian";
    case PhaseVerdict::q_broken: return "Q-broken";
    case PhaseVerdict::indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

PhaseVerdict classify_eigenvalues(const std::vector<std::complex<double>>& values, double tau_gamma,
                                  double tau_energy) {
  if (!(tau_gamma > 0.0) || !(tau_energy > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "classification tolerances must be positive");
  }
  bool any = false;
  for (const auto& v : values) {
    if (std::abs(v.real()) > tau_gamma) continue;
    any = true;
    if (std::abs(v.imag()) > tau_energy) return PhaseVerdict::q_broken;
  }
  return any ? PhaseVerdict::unbroken : PhaseVerdict::indeterminate;
}

PhaseClassification classify_phase(const SpectrumReport& spec, double tau_gamma, double tau_energy) {
  if (spec.entries.empty()) throw Error(ErrorCode::invalid_argument, "empty spectrum");
  PhaseClassification out;
  out.tau_gamma = tau_gamma;
  out.tau_energy = tau_energy;
  std::vector<cd> values;
  for (const auto& e : spec.entries) {
    values.push_back(e.value);
    if (std::abs(e.gamma()) <= tau_gamma) {
      out.evidence.push_back(e.value);
      out.evidence_degrees.push_back(e.degree);
    }
  }
  out.verdict = classify_eigenvalues(values, tau_gamma, tau_energy);
  out.witten_index = witten_index(spec, tau_gamma).index;
  return out;
}

WittenIndex witten_index(const SpectrumReport& spec, double tau0) {
  if (!(tau0 > 0.0)) throw Error(ErrorCode::invalid_argument, "tau0 must be positive");
  WittenIndex out;
  out.tau = tau0;
  out.zero_modes.assign(spec.block_sizes.size(), 0);
  for (const auto& e : spec.entries) {
    const double mag = std::abs(e.value);
    if (mag <= tau0) {
      ++out.zero_modes[e.degree];
    } else if (mag <= 10.0 * tau0) {
      out.gap_ambiguity = true;
    }
  }
  for (std::size_t k = 0; k < out.zero_modes.size(); ++k) {
    out.index += (k % 2 == 0 ? 1 : -1) * out.zero_modes[k];
  }
  if (out.gap_ambiguity) {
    out.warnings.push_back("eigenvalue within (tau0, 10 tau0]: zero-mode count is gap-ambiguous");
  }
  return out;
}

PairingReport susy_pairing_check(const SpectrumReport& spec, double tol, double tau0) {
  PairingReport out;
  out.tolerance = tol;
  const std::size_t n = spec.entries.size();
  out.pair_id.assign(n, -1);
  const double scale = std::max(spec.spectral_radius, 1e-300);
  std::vector<bool> nonzero(n);
  for (std::size_t i = 0; i < n; ++i) nonzero[i] = std::abs(spec.entries[i].value) > tau0;

  const int dim = spec.dimension();
  for (int k = 0; k < dim; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = spec.entries[i];
      if (a.degree != k || !nonzero[i] || out.pair_id[i] >= 0) continue;
      std::size_t best = n;
      double best_dist = INFINITY;
      for (std::size_t j = 0; j < n; ++j) {
        const auto& b = spec.entries[j];
        if (b.degree != k + 1 || !nonzero[j] || out.pair_id[j] >= 0) continue;
        const double dist = std::abs(a.value - b.value);
        if (dist < best_dist) {
          best_dist = dist;
          best = j;
        }
      }
      if (best < n && best_dist <= tol * scale) {
        out.pair_id[i] = out.pair_id[best] = out.pairs++;
        out.max_mismatch = std::max(out.max_mismatch, best_dist / scale);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (nonzero[i] && out.pair_id[i] < 0) out.unpaired.push_back(i);
  }
  out.multiset_equal = dim == 1 && out.unpaired.empty();
  return out;
}

double conjugate_closure_defect(const SpectrumReport& spec) {
  double worst = 0.0;
  for (int k = 0; k <= spec.dimension(); ++k) {
    const auto values = spec.eigenvalues(k);
    for (const auto& v : values) {
      double best = INFINITY;
      for (const auto& w : values) best = std::min(best, std::abs(std::conj(v) - w));
      worst = std::max(worst, best);
    }
  }
  return worst / std::max(spec.spectral_radius, 1e-300);
}

void write_spectrum_csv(const std::filesystem::path& path, const SpectrumReport& spec,
                        const PairingReport& pairing, double tau_gamma) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << "degree,index,gamma,e,pair_id,physical_flag\n";
  std::vector<int> counter(spec.block_sizes.size(), 0);
  for (std::size_t i = 0; i < spec.entries.size(); ++i) {
    const auto& e = spec.entries[i];
    const int pid = i < pairing.pair_id.size() ? pairing.pair_id[i] : -1;
    out << e.degree << ',' << counter[e.degree]++ << ',' << detail::sci(e.gamma()) << ','
        << detail::sci(e.energy()) << ',' << pid << ','
        << (std::abs(e.gamma()) <= tau_gamma ? 1 : 0) << '\n';
  }
}

}  // namespace stochq
