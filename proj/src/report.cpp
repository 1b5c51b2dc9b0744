#include "stochq/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <Eigen/Core>

#include "format.hpp"
#include "json_writer.hpp"
#include "stochq/fokker_planck.hpp"
#include "stochq/morse_analysis.hpp"
#include "stochq/spectral_analysis.hpp"

namespace stochq {

using ojson = nlohmann::ordered_json;

namespace {

[[noreturn]] void invalid(const std::string& message) { throw Error(ErrorCode::validation, message); }

void check_keys(const ojson& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) invalid("'" + where + "' must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) invalid("unknown key '" + it.key() + "' in " + where);
  }
}

double number(const ojson& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) invalid("'" + key + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) invalid("'" + key + "' must be finite");
  return x;
}

long integer(const ojson& obj, const std::string& key, long fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer() && !v.is_number_unsigned()) invalid("'" + key + "' must be an integer");
  return v.get<long>();
}

std::vector<double> number_list(const ojson& v, const std::string& key) {
  if (!v.is_array()) invalid("'" + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) invalid("'" + key + "' must contain numbers only");
    out.push_back(x.get<double>());
  }
  return out;
}

void require_decreasing(const std::vector<double>& eps, const std::string& key, bool allow_zero) {
  if (eps.empty()) invalid("'" + key + "' must not be empty");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!std::isfinite(eps[i]) || eps[i] < 0.0 || (!allow_zero && eps[i] == 0.0)) {
      invalid("'" + key + "' entries must be " + (allow_zero ? "nonnegative" : "positive"));
    }
    if (i > 0 && !(eps[i] < eps[i - 1])) invalid("'" + key + "' must be strictly decreasing");
  }
}

ojson complex_json(std::complex<double> z) { return ojson::array({z.real(), z.imag()}); }

std::string csv_number(double x) { return detail::sci(x); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << text;
}

// ---- inline models --------------------------------------------------------

MeshComplex inline_mesh(const ojson& spec, const std::filesystem::path& base) {
  check_keys(spec, "mesh", {"kind", "n", "length", "nx", "ny", "lx", "ly", "path", "subdivisions"});
  if (!spec.contains("kind") || !spec["kind"].is_string()) invalid("mesh.kind must be a string");
  const std::string kind = spec["kind"].get<std::string>();
  constexpr double two_pi = 6.283185307179586;
  if (kind == "circle") {
    return build_circle_grid(static_cast<int>(integer(spec, "n", 64)), number(spec, "length", two_pi));
  }
  if (kind == "torus") {
    const int n = static_cast<int>(integer(spec, "n", 16));
    return build_torus_grid(static_cast<int>(integer(spec, "nx", n)), static_cast<int>(integer(spec, "ny", n)),
                            number(spec, "lx", two_pi), number(spec, "ly", two_pi));
  }
  if (kind == "off") {
    if (!spec.contains("path") || !spec["path"].is_string()) invalid("mesh.path must be a string");
    std::filesystem::path p = spec["path"].get<std::string>();
    if (p.is_relative()) p = base / p;
    return build_triangulated_surface(read_off(p));
  }
  if (kind == "icosphere") {
    return build_triangulated_surface(icosphere(static_cast<int>(integer(spec, "subdivisions", 2))));
  }
  invalid("mesh.kind must be one of circle, torus, off, icosphere");
}

ModelSpec inline_model(const RunConfig& cfg, double epsilon) {
  ModelSpec m;
  m.name = "inline";
  m.mesh = inline_mesh(*cfg.inline_mesh, cfg.base_dir);
  m.noise = NoiseSpec{epsilon};
  validate(m.noise);
  m.flow = FlowField::zero(m.mesh);
  const int dim = m.mesh.dimension();
  if (cfg.inline_flow) {
    const ojson& f = *cfg.inline_flow;
    check_keys(f, "flow", {"constant", "samples", "superpotential"});
    if (f.size() != 1) invalid("flow must hold exactly one of constant, samples, superpotential");
    if (f.contains("constant")) {
      const auto c = number_list(f["constant"], "flow.constant");
      if (static_cast<int>(c.size()) != dim) invalid("flow.constant needs one component per dimension");
      const std::array<double, 2> a{c[0], dim > 1 ? c[1] : 0.0};
      m.flow = FlowField::sampled(m.mesh, [a](double, double) { return a; });
      m.drift = [a](double, double) { return a; };
    } else if (f.contains("samples")) {
      const auto& rows = f["samples"];
      if (!rows.is_array() || static_cast<int>(rows.size()) != m.mesh.cell_count(0)) {
        invalid("flow.samples needs one row per vertex");
      }
      for (std::size_t v = 0; v < rows.size(); ++v) {
        const auto row = number_list(rows[v], "flow.samples");
        if (static_cast<int>(row.size()) != m.flow.samples.cols()) invalid("flow.samples row has the wrong width");
        for (std::size_t d = 0; d < row.size(); ++d) m.flow.samples(static_cast<Eigen::Index>(v), d) = row[d];
      }
    } else {
      const auto w = number_list(f["superpotential"], "flow.superpotential");
      if (static_cast<int>(w.size()) != m.mesh.cell_count(0)) invalid("flow.superpotential needs one value per vertex");
      m.flow = FlowField::langevin(m.mesh, Eigen::Map<const Eigen::VectorXd>(w.data(), w.size()), m.noise);
      m.oracle.source = "closed-form stationary density";
      m.oracle.real_spectrum = true;
      if (dim == 1) {
        // Discrete closed form: exp(-2W) with W averaged over the edge endpoints.
        const int n = m.mesh.cell_count(0);
        const double h = m.mesh.spacing(0);
        m.oracle.stationary_density = [w, n, h](double x, double) {
          const int i = ((static_cast<int>(std::floor(x / h)) % n) + n) % n;
          return std::exp(-(w[i] + w[(i + 1) % n]));
        };
      }
    }
    if (!m.drift && m.mesh.is_structured()) {
      const MeshComplex mesh = m.mesh;
      const Eigen::MatrixXd samples = m.flow.samples;
      m.drift = [mesh, samples](double x, double y) { return interpolate_flow(mesh, samples, x, y); };
    }
  } else if (m.mesh.is_structured()) {
    m.drift = [](double, double) { return std::array<double, 2>{0.0, 0.0}; };
  }
  if (m.flow.is_zero()) m.oracle.witten_index = m.mesh.euler_characteristic();
  return m;
}

// ---- task context ---------------------------------------------------------

struct Context {
  const RunConfig& cfg;
  std::function<ModelSpec(double)> rebuild;
  ModelSpec model;
  std::filesystem::path out;
  std::vector<std::filesystem::path> files;
  std::vector<std::string> warnings;
  std::optional<SpectrumReport> spectrum;

  GradedOperator op(const ModelSpec& m) const {
    if (m.noise.deterministic() && !m.flow.is_zero()) return deterministic_generator(m.mesh, m.flow, cfg.backend);
    return assemble_hamiltonian(m.mesh, m.flow, m.noise, cfg.backend);
  }

  const SpectrumReport& spec(bool vectors) {
    if (!spectrum || (vectors && !spectrum->has_vectors)) {
      SpectralOptions options;
      options.compute_vectors = vectors;
      spectrum = full_spectrum(op(model), options);
      for (const auto& w : spectrum->warnings) warnings.push_back(w);
    }
    return *spectrum;
  }

  double tau_gamma(const SpectrumReport& s) const { return cfg.tolerances.gamma * s.spectral_radius; }
  double tau_energy(const SpectrumReport& s) const { return cfg.tolerances.energy * s.spectral_radius; }
  double tau_zero(const SpectrumReport& s) const { return cfg.tolerances.zero * s.spectral_radius; }

  std::filesystem::path file(const std::string& name) {
    files.push_back(out / name);
    return out / name;
  }
};

ojson oracle_comparison(const ModelSpec& m, const SpectrumReport& s, Backend backend) {
  if (m.oracle.source.empty()) return nullptr;
  ojson o;
  o["source"] = m.oracle.source;
  if (!m.oracle.note.empty()) o["note"] = m.oracle.note;
  if (m.oracle.spectrum.empty()) return o;
  double worst = 0.0;
  for (const auto& ev : m.oracle.spectrum) {
    double best = INFINITY;
    for (const auto& e : s.entries) {
      if (e.degree == ev.degree) best = std::min(best, std::abs(e.value - ev.value));
    }
    const double scale = std::abs(ev.value) > 0.0 ? std::abs(ev.value) : s.spectral_radius;
    worst = std::max(worst, best / scale);
  }
  o["compared_eigenvalues"] = m.oracle.spectrum.size();
  o["max_relative_error"] = worst;
  o["tolerance"] = m.oracle.spectrum_tolerance;
  o["within_tolerance"] = backend == Backend::fourier && worst < m.oracle.spectrum_tolerance;
  if (backend != Backend::fourier) o["comment"] = "finite differences carry second-order discretization error";
  return o;
}

ojson task_spectrum(Context& c) {
  const auto& s = c.spec(false);
  const double tz = c.tau_zero(s);
  const auto pairing = susy_pairing_check(s, 1e-8, tz);
  write_spectrum_csv(c.file("spectrum.csv"), s, pairing, c.tau_gamma(s));
  ojson r;
  r["csv"] = "spectrum.csv";
  r["block_sizes"] = s.block_sizes;
  r["spectral_radius"] = s.spectral_radius;
  r["conjugate_closure_defect"] = conjugate_closure_defect(s);
  if (!c.model.noise.deterministic() || c.model.flow.is_zero()) {
    r["intertwining_residual"] = intertwining_residual(c.model.mesh, c.op(c.model));
  }
  ojson pr;
  pr["pairs"] = pairing.pairs;
  pr["unpaired"] = pairing.unpaired.size();
  pr["max_mismatch"] = pairing.max_mismatch;
  pr["tolerance"] = pairing.tolerance;
  r["susy_pairing"] = pr;
  ojson low = ojson::array();
  for (std::size_t i = 0; i < std::min<std::size_t>(12, s.entries.size()); ++i) {
    const auto& e = s.entries[i];
    low.push_back({{"degree", e.degree}, {"gamma", e.gamma()}, {"e", e.energy()}});
  }
  r["lowest"] = low;
  r["oracle"] = oracle_comparison(c.model, s, c.cfg.backend);
  return r;
}

ojson task_classify(Context& c) {
  const auto& s = c.spec(false);
  const auto pc = classify_phase(s, c.tau_gamma(s), c.tau_energy(s));
  ojson r;
  r["verdict"] = to_string(pc.verdict);
  r["tau_gamma"] = pc.tau_gamma;
  r["tau_energy"] = pc.tau_energy;
  ojson ev = ojson::array();
  for (std::size_t i = 0; i < pc.evidence.size(); ++i) {
    ev.push_back({{"degree", pc.evidence_degrees[i]}, {"gamma", pc.evidence[i].real()}, {"e", pc.evidence[i].imag()}});
  }
  r["physical_states"] = ev;
  r["witten_index"] = pc.witten_index;
  if (pc.evidence.empty()) c.warnings.push_back("no physical state found: classification indeterminate");
  return r;
}

ojson task_witten(Context& c) {
  const auto& s = c.spec(false);
  const auto w = witten_index(s, c.tau_zero(s));
  ojson r;
  r["witten_index"] = w.index;
  r["zero_modes"] = w.zero_modes;
  r["betti_numbers"] = c.model.mesh.betti_numbers();
  r["euler_characteristic"] = c.model.mesh.euler_characteristic();
  r["tau0"] = w.tau;
  r["gap_ambiguity"] = w.gap_ambiguity;
  for (const auto& msg : w.warnings) c.warnings.push_back(msg);
  return r;
}

ojson task_stationary(Context& c) {
  if (c.model.noise.deterministic()) {
    throw Error(ErrorCode::deterministic_limit, "stationary density needs epsilon > 0");
  }
  const auto& s = c.spec(true);
  const int top = c.model.mesh.dimension();
  const SpectrumEntry* best = nullptr;
  for (const auto& e : s.entries) {
    if (e.degree == top && (!best || std::abs(e.value) < std::abs(best->value))) best = &e;
  }
  if (!best) throw Error(ErrorCode::ergodic_zero_missing, "no top-degree eigenvalue");
  physical_states(s, c.tau_gamma(s));
  const auto& mesh = c.model.mesh;
  const Eigen::VectorXd vol = mesh.primal_volumes(top);
  const Eigen::VectorXcd normalized = best->right / best->right.sum();
  const Eigen::VectorXd density = normalized.real().cwiseQuotient(vol);
  const auto centers = mesh.cell_centers(top);

  Eigen::VectorXd ref;
  if (c.model.oracle.stationary_density) {
    ref.resize(density.size());
    for (Eigen::Index i = 0; i < ref.size(); ++i) ref[i] = c.model.oracle.stationary_density(centers[i][0], centers[i][1]);
    ref /= ref.dot(vol);
  }
  std::ostringstream csv;
  csv << "cell,x,y,density,reference\n";
  for (Eigen::Index i = 0; i < density.size(); ++i) {
    csv << i << ',' << csv_number(centers[i][0]) << ',' << csv_number(centers[i][1]) << ','
        << csv_number(density[i]) << ',' << (ref.size() ? csv_number(ref[i]) : std::string()) << '\n';
  }
  write_text(c.file("stationary.csv"), csv.str());

  ojson r;
  r["csv"] = "stationary.csv";
  r["eigenvalue"] = complex_json(best->value);
  r["min_density"] = density.minCoeff();
  if (ref.size()) {
    r["max_relative_error"] = (density - ref).cwiseAbs().maxCoeff() / ref.maxCoeff();
    r["l1_error"] = (density - ref).cwiseAbs().dot(vol);
  }
  ojson peaks = ojson::array();
  if (mesh.kind() == MeshKind::circle) {
    const int n = static_cast<int>(density.size());
    for (int i = 0; i < n; ++i) {
      const double d = density[i];
      if (d > density[(i + n - 1) % n] && d >= density[(i + 1) % n] && d > 0.5 * density.maxCoeff()) {
        peaks.push_back(centers[i][0]);
      }
    }
    r["peaks"] = peaks;
  }
  return r;
}

ojson point_json(const CriticalPoint& p, int dim) {
  ojson j;
  ojson loc = ojson::array();
  for (int d = 0; d < dim; ++d) loc.push_back(p.location[d]);
  j["location"] = loc;
  ojson jac = ojson::array();
  for (int a = 0; a < dim; ++a) {
    ojson row = ojson::array();
    for (int b = 0; b < dim; ++b) row.push_back(p.jacobian(a, b));
    jac.push_back(row);
  }
  j["jacobian"] = jac;
  ojson ev = ojson::array();
  for (const auto& l : p.eigenvalues) ev.push_back(complex_json(l));
  j["eigenvalues"] = ev;
  j["delta"] = p.delta;
  j["sign"] = p.sign;
  j["hyperbolic"] = p.hyperbolic;
  j["complex_pair"] = p.complex_pair;
  j["ground_state_degree"] = p.stable_directions;
  return j;
}

ojson task_morse(Context& c) {
  const auto& m = c.model;
  const auto set = find_critical_points(m.mesh, m.flow);
  for (const auto& w : set.warnings) c.warnings.push_back(w);
  ojson r;
  ojson pts = ojson::array();
  for (const auto& p : set.points) pts.push_back(point_json(p, m.mesh.dimension()));
  r["points"] = pts;
  r["euler_characteristic"] = m.mesh.euler_characteristic();
  try {
    r["poincare_hopf_sum"] = poincare_hopf_sum(set.points);
  } catch (const Error& e) {
    r["poincare_hopf_sum"] = nullptr;
    c.warnings.push_back(e.what());
  }
  if (m.is_langevin() && m.minima >= 2) {
    std::vector<double> eps = c.cfg.morse_epsilons;
    if (eps.empty()) eps = {m.noise.epsilon, m.noise.epsilon / 2, m.noise.epsilon / 4};
    const auto scan = instanton_splitting_scan(m, eps);
    ojson rows = ojson::array();
    for (const auto& row : scan.rows) {
      rows.push_back({{"epsilon", row.epsilon},
                      {"splitting", row.splitting},
                      {"first_non_tunneling", row.first_non_tunneling},
                      {"near_zero_counts", row.near_zero_counts}});
    }
    ojson inst;
    inst["rows"] = rows;
    inst["tunneling_count"] = scan.tunneling_count;
    inst["morse_counts"] = scan.rows.front().morse_counts;
    inst["strictly_decreasing"] = scan.strictly_decreasing;
    inst["second_differences"] = scan.second_differences;
    inst["log_convex"] = scan.log_convex;
    inst["weak_morse_counting"] = scan.weak_morse_counting;
    r["instanton"] = inst;
  } else {
    r["instanton"] = nullptr;
  }
  write_text(c.file("morse.json"), detail::stable_json(r));
  return r;
}

ojson task_simulate(Context& c) {
  const auto& sc = c.cfg.simulation;
  const auto ens = simulate_sde(c.model, sc.params);
  for (const auto& w : ens.warnings) c.warnings.push_back(w);
  ojson r;
  const auto hist = stationary_histogram(ens, sc.bins, sc.burn_in);
  std::vector<double> ref;
  if (c.model.oracle.stationary_density) ref = reference_bin_mass(hist, c.model.oracle.stationary_density);
  std::ostringstream csv;
  csv << (hist.dims == 1 ? "bin,x_lo,x_hi,mass,reference\n" : "bin_x,bin_y,x_lo,x_hi,y_lo,y_hi,mass,reference\n");
  for (std::size_t i = 0; i < hist.mass.size(); ++i) {
    const int bx = static_cast<int>(i % hist.bins);
    const int by = static_cast<int>(i / hist.bins);
    if (hist.dims == 1) {
      csv << bx << ',';
    } else {
      csv << bx << ',' << by << ',';
    }
    csv << csv_number(bx * hist.bin_width(0)) << ',' << csv_number((bx + 1) * hist.bin_width(0)) << ',';
    if (hist.dims == 2) {
      csv << csv_number(by * hist.bin_width(1)) << ',' << csv_number((by + 1) * hist.bin_width(1)) << ',';
    }
    csv << csv_number(hist.mass[i]) << ',' << (ref.empty() ? std::string() : csv_number(ref[i])) << '\n';
  }
  write_text(c.file("histogram.csv"), csv.str());
  r["histogram_csv"] = "histogram.csv";
  r["samples"] = hist.samples;
  if (!ref.empty()) r["tv_distance"] = total_variation(hist.mass, ref);

  const auto drift = drift_estimate(ens);
  r["mean_velocity"] = drift.mean_velocity;
  r["velocity_stderr"] = drift.velocity_stderr;
  r["mean_square_displacement"] = drift.mean_square_displacement;

  ojson fit;
  try {
    const auto acf = autocorrelation_decay(ens, sc.autocorrelation);
    fit["rate"] = acf.rate;
    fit["rate_stderr"] = acf.rate_stderr;
    fit["frequency"] = acf.frequency;
    fit["phase_slope"] = acf.phase_slope;
    fit["fit_start"] = acf.fit_start;
    fit["fit_end"] = acf.fit_end;
    fit["fit_points"] = acf.fit_points;
    fit["noise_floor"] = acf.noise_floor;
    ojson curve = ojson::array();
    for (std::size_t i = 0; i < acf.lags.size(); ++i) {
      curve.push_back({acf.lags[i], acf.correlation[i].real(), acf.correlation[i].imag()});
    }
    fit["correlation"] = curve;
    r["autocorrelation_rate"] = acf.rate;
    r["autocorrelation_frequency"] = acf.frequency;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::unfittable) throw;
    fit["error"] = e.what();
    c.warnings.push_back(std::string("autocorrelation: ") + e.what());
  }
  if (c.spectrum) {
    double slowest = INFINITY;
    const double tg = c.tau_gamma(*c.spectrum);
    for (const auto& e : c.spectrum->entries) {
      if (e.gamma() > tg) slowest = std::min(slowest, e.gamma());
    }
    if (std::isfinite(slowest)) fit["spectral_rate"] = slowest;
  }
  write_text(c.file("fit_diagnostics.json"), detail::stable_json(fit));
  r["fit_diagnostics"] = "fit_diagnostics.json";
  if (sc.dump_paths) {
    dump_paths(ens, c.file("paths.bin"), c.file("paths.json"));
    r["paths"] = "paths.bin";
  }
  return r;
}

ojson task_sweep(Context& c) {
  const auto& eps = c.cfg.sweep_epsilons;
  if (eps.empty()) invalid("the sweep task needs sweep.epsilons");
  SpectralOptions options;
  options.compute_vectors = false;
  ojson rows = ojson::array();
  std::ostringstream csv;
  csv << "epsilon,ratio,gamma,e,verdict\n";
  std::vector<double> ratios;
  bool all_defined = true;
  for (double e : eps) {
    const ModelSpec m = c.rebuild(e);
    const auto s = full_spectrum(c.op(m), options);
    const double tg = c.cfg.tolerances.gamma * s.spectral_radius;
    const double te = c.cfg.tolerances.energy * s.spectral_radius;
    const SpectrumEntry* slow = nullptr;
    for (const auto& en : s.entries) {
      if (std::abs(en.energy()) <= te) continue;
      if (!slow || std::abs(en.gamma()) < std::abs(slow->gamma()) ||
          (std::abs(en.gamma()) == std::abs(slow->gamma()) && std::abs(en.energy()) < std::abs(slow->energy()))) {
        slow = &en;
      }
    }
    const std::string verdict = to_string(classify_phase(s, tg, te).verdict);
    ojson row;
    row["epsilon"] = e;
    if (slow) {
      const double ratio = std::abs(slow->gamma()) / std::abs(slow->energy());
      ratios.push_back(ratio);
      row["ratio"] = ratio;
      row["gamma"] = slow->gamma();
      row["e"] = slow->energy();
      csv << csv_number(e) << ',' << csv_number(ratio) << ',' << csv_number(slow->gamma()) << ','
          << csv_number(slow->energy()) << ',' << verdict << '\n';
    } else {
      all_defined = false;
      row["ratio"] = nullptr;
      csv << csv_number(e) << ",,,," << verdict << '\n';
    }
    row["verdict"] = verdict;
    if (c.model.name == "constant_drive_circle" && c.model.params.at("a") != 0.0) {
      row["expected_ratio"] = e / (2.0 * std::abs(c.model.params.at("a")));
    }
    rows.push_back(row);
  }
  write_text(c.file("sweep.csv"), csv.str());
  ojson r;
  r["csv"] = "sweep.csv";
  r["rows"] = rows;
  if (all_defined) {
    bool decreasing = true;
    for (std::size_t i = 1; i < ratios.size(); ++i) decreasing = decreasing && ratios[i] < ratios[i - 1];
    r["strictly_decreasing"] = decreasing;
    r["condensation"] = ratios.back() < 0.05;
    r["summary"] = ratios.back() < 0.05 ? "imaginary-axis condensation" : "no condensation";
  } else {
    r["strictly_decreasing"] = nullptr;
    r["condensation"] = false;
    r["summary"] = "no condensation";
  }
  return r;
}

ojson describe_model(const ModelSpec& m, const RunConfig& cfg) {
  ojson j;
  j["name"] = m.name;
  ojson params = ojson::object();
  for (const auto& [k, v] : m.params) params[k] = v;
  j["params"] = params;
  ojson mesh;
  mesh["kind"] = to_string(m.mesh.kind());
  mesh["dimension"] = m.mesh.dimension();
  std::vector<int> counts;
  for (int k = 0; k <= m.mesh.dimension(); ++k) counts.push_back(m.mesh.cell_count(k));
  mesh["cell_counts"] = counts;
  mesh["euler_characteristic"] = m.mesh.euler_characteristic();
  mesh["warnings"] = m.mesh.warnings();
  j["mesh"] = mesh;
  j["epsilon"] = m.noise.epsilon;
  j["backend"] = cfg.backend == Backend::fourier ? "fourier" : "fd";
  j["langevin"] = m.is_langevin();
  if (m.oracle.witten_index) j["expected_witten_index"] = *m.oracle.witten_index;
  return j;
}

ojson config_echo(const RunConfig& cfg) {
  ojson j;
  if (!cfg.model_name.empty()) {
    ojson params = ojson::object();
    for (const auto& [k, v] : cfg.model_params) params[k] = v;
    j["model"] = {{"name", cfg.model_name}, {"params", params}};
  } else {
    j["mesh"] = *cfg.inline_mesh;
    if (cfg.inline_flow) j["flow"] = *cfg.inline_flow;
  }
  if (cfg.epsilon) j["epsilon"] = *cfg.epsilon;
  j["backend"] = cfg.backend == Backend::fourier ? "fourier" : "fd";
  j["tolerances"] = {{"gamma", cfg.tolerances.gamma}, {"energy", cfg.tolerances.energy}, {"zero", cfg.tolerances.zero}};
  j["tasks"] = cfg.tasks;
  if (!cfg.sweep_epsilons.empty()) j["sweep"] = {{"epsilons", cfg.sweep_epsilons}};
  if (!cfg.morse_epsilons.empty()) j["morse"] = {{"epsilons", cfg.morse_epsilons}};
  const auto& s = cfg.simulation;
  j["simulation"] = {{"dt", s.params.dt},
                     {"steps", s.params.steps},
                     {"n_paths", s.params.n_paths},
                     {"seed", s.params.seed},
                     {"record_stride", s.params.record_stride},
                     {"bins", s.bins},
                     {"burn_in", s.burn_in},
                     {"dump_paths", s.dump_paths},
                     {"max_lag", s.autocorrelation.max_lag},
                     {"fit_start", s.autocorrelation.fit_start}};
  return j;
}

}  // namespace

const std::vector<std::string>& known_tasks() {
  static const std::vector<std::string> tasks = {"spectrum", "classify", "witten", "stationary",
                                                 "morse",    "simulate", "sweep"};
  return tasks;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::capacity:
    case ErrorCode::numerical:
    case ErrorCode::ergodic_zero_missing:
    case ErrorCode::indeterminate_index:
    case ErrorCode::statistics:
    case ErrorCode::unfittable:
      return 3;
    default:
      return 2;
  }
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    invalid(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, "config", {"model", "mesh", "flow", "epsilon", "backend", "tolerances", "tasks", "sweep",
                           "morse", "simulation", "output_dir"});
  RunConfig cfg;
  cfg.source = j;
  cfg.base_dir = base_dir;

  if (j.contains("model")) {
    if (j.contains("mesh") || j.contains("flow")) invalid("give either model or mesh/flow, not both");
    const auto& m = j["model"];
    check_keys(m, "model", {"name", "params"});
    if (!m.contains("name") || !m["name"].is_string()) invalid("model.name must be a string");
    cfg.model_name = m["name"].get<std::string>();
    bool known = false;
    std::string names;
    for (const auto& info : available_models()) {
      known = known || info.name == cfg.model_name;
      names += (names.empty() ? "" : ", ") + info.name;
    }
    if (!known) invalid("unknown model '" + cfg.model_name + "'; available: " + names);
    if (m.contains("params")) {
      if (!m["params"].is_object()) invalid("model.params must be an object");
      for (auto it = m["params"].begin(); it != m["params"].end(); ++it) {
        cfg.model_params[it.key()] = number(m["params"], it.key(), 0.0);
      }
    }
  } else if (j.contains("mesh")) {
    cfg.inline_mesh = j["mesh"];
    if (j.contains("flow")) cfg.inline_flow = j["flow"];
    if (!j.contains("epsilon")) invalid("inline mesh/flow configs need 'epsilon'");
  } else {
    invalid("config needs 'model' or 'mesh'");
  }
  if (j.contains("epsilon")) cfg.epsilon = number(j, "epsilon", 0.0);
  if (cfg.epsilon && *cfg.epsilon < 0.0) invalid("epsilon must be nonnegative");

  if (j.contains("backend")) {
    if (!j["backend"].is_string()) invalid("backend must be a string");
    cfg.backend = backend_from_string(j["backend"].get<std::string>());
  }
  if (j.contains("tolerances")) {
    const auto& t = j["tolerances"];
    check_keys(t, "tolerances", {"gamma", "energy", "zero"});
    cfg.tolerances = {number(t, "gamma", 1e-8), number(t, "energy", 1e-8), number(t, "zero", 1e-8)};
    if (!(cfg.tolerances.gamma > 0 && cfg.tolerances.energy > 0 && cfg.tolerances.zero > 0)) {
      invalid("tolerances must be positive");
    }
  }
  if (!j.contains("tasks") || !j["tasks"].is_array()) invalid("'tasks' must be an array");
  for (const auto& t : j["tasks"]) {
    if (!t.is_string()) invalid("tasks must be strings");
    const auto name = t.get<std::string>();
    const auto& known = known_tasks();
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      invalid("unknown task '" + name + "'; tasks: spectrum, classify, witten, stationary, morse, simulate, sweep");
    }
    if (std::find(cfg.tasks.begin(), cfg.tasks.end(), name) != cfg.tasks.end()) invalid("duplicate task '" + name + "'");
    cfg.tasks.push_back(name);
  }
  if (cfg.tasks.empty()) invalid("at least one task is required");

  if (j.contains("sweep")) {
    check_keys(j["sweep"], "sweep", {"epsilons"});
    if (j["sweep"].contains("epsilons")) cfg.sweep_epsilons = number_list(j["sweep"]["epsilons"], "sweep.epsilons");
  }
  if (std::find(cfg.tasks.begin(), cfg.tasks.end(), "sweep") != cfg.tasks.end()) {
    require_decreasing(cfg.sweep_epsilons, "sweep.epsilons", true);
  }
  if (j.contains("morse")) {
    check_keys(j["morse"], "morse", {"epsilons"});
    if (j["morse"].contains("epsilons")) {
      cfg.morse_epsilons = number_list(j["morse"]["epsilons"], "morse.epsilons");
      require_decreasing(cfg.morse_epsilons, "morse.epsilons", false);
    }
  }
  if (j.contains("simulation")) {
    const auto& s = j["simulation"];
    check_keys(s, "simulation", {"dt", "steps", "n_paths", "seed", "record_stride", "bins", "burn_in",
                                 "dump_paths", "max_lag", "fit_start"});
    auto& p = cfg.simulation.params;
    p.dt = number(s, "dt", p.dt);
    p.steps = integer(s, "steps", p.steps);
    p.n_paths = static_cast<int>(integer(s, "n_paths", p.n_paths));
    p.seed = static_cast<std::uint64_t>(integer(s, "seed", static_cast<long>(p.seed)));
    p.record_stride = static_cast<int>(integer(s, "record_stride", p.record_stride));
    cfg.simulation.bins = static_cast<int>(integer(s, "bins", cfg.simulation.bins));
    cfg.simulation.burn_in = number(s, "burn_in", cfg.simulation.burn_in);
    if (s.contains("dump_paths")) {
      if (!s["dump_paths"].is_boolean()) invalid("simulation.dump_paths must be a boolean");
      cfg.simulation.dump_paths = s["dump_paths"].get<bool>();
    }
    cfg.simulation.autocorrelation.burn_in = cfg.simulation.burn_in;
    cfg.simulation.autocorrelation.max_lag = number(s, "max_lag", 0.0);
    cfg.simulation.autocorrelation.fit_start = number(s, "fit_start", 0.0);
    if (!(p.dt > 0) || p.steps < 1 || p.n_paths < 1 || p.record_stride < 1 || cfg.simulation.bins < 1) {
      invalid("simulation parameters dt, steps, n_paths, record_stride and bins must be positive");
    }
    if (!(cfg.simulation.burn_in >= 0 && cfg.simulation.burn_in < 1)) invalid("simulation.burn_in must lie in [0, 1)");
  }
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) invalid("output_dir must be a string");
    cfg.output_dir = j["output_dir"].get<std::string>();
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::validation, "cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.has_parent_path() ? path.parent_path() : ".");
}

RunResult run(const RunConfig& cfg) {
  using clock = std::chrono::steady_clock;
  RunResult result;
  std::filesystem::create_directories(cfg.output_dir);

  ojson report;
  report["schema_version"] = 1;
  report["tool"] = {{"name", "stochq"},
                    {"version", version_string},
                    {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                  std::to_string(EIGEN_MINOR_VERSION)}};
  report["config"] = config_echo(cfg);
  ojson timings = ojson::object();
  ojson results = ojson::object();

  std::function<ModelSpec(double)> rebuild;
  if (!cfg.model_name.empty()) {
    rebuild = [&cfg](double eps) {
      ModelParams p = cfg.model_params;
      p["epsilon"] = eps;
      return make_model(cfg.model_name, p);
    };
  } else {
    rebuild = [&cfg](double eps) { return inline_model(cfg, eps); };
  }

  std::vector<std::string> warnings;
  std::string failed_task;
  try {
    const auto t0 = clock::now();
    ModelSpec model;
    if (!cfg.model_name.empty()) {
      ModelParams p = cfg.model_params;
      if (cfg.epsilon) p["epsilon"] = *cfg.epsilon;
      model = make_model(cfg.model_name, p);
    } else {
      model = inline_model(cfg, *cfg.epsilon);
    }
    timings["model"] = std::chrono::duration<double>(clock::now() - t0).count();
    report["model"] = describe_model(model, cfg);
    Context ctx{cfg, rebuild, std::move(model), cfg.output_dir, {}, {}, std::nullopt};
    for (const auto& task : cfg.tasks) {
      failed_task = task;
      const auto start = clock::now();
      ojson r;
      if (task == "spectrum") r = task_spectrum(ctx);
      else if (task == "classify") r = task_classify(ctx);
      else if (task == "witten") r = task_witten(ctx);
      else if (task == "stationary") r = task_stationary(ctx);
      else if (task == "morse") r = task_morse(ctx);
      else if (task == "simulate") r = task_simulate(ctx);
      else r = task_sweep(ctx);
      results[task] = r;
      timings[task] = std::chrono::duration<double>(clock::now() - start).count();
    }
    failed_task.clear();
    warnings = ctx.warnings;
    result.files = ctx.files;
    report["status"] = "ok";
  } catch (const Error& e) {
    result.exit_code = exit_code_for(e.code());
    result.error = e.code();
    result.error_message = e.what();
    report["status"] = "failed";
    report["error"] = {{"code", to_string(e.code())}, {"message", e.what()}, {"task", failed_task}};
  } catch (const std::bad_alloc&) {
    result.exit_code = 3;
    result.error = ErrorCode::capacity;
    result.error_message = "out of memory";
    report["status"] = "failed";
    report["error"] = {{"code", "capacity"}, {"message", "out of memory"}, {"task", failed_task}};
  }
  report["results"] = results;
  report["warnings"] = warnings;

  result.report = detail::stable_json(report);
  write_text(cfg.output_dir / "report.json", result.report);
  write_text(cfg.output_dir / "timings.json", timings.dump(2) + "\n");
  result.files.push_back(cfg.output_dir / "report.json");
  result.files.push_back(cfg.output_dir / "timings.json");
  return result;
}

}  // namespace stochq
