#include "stochq/trajectory_sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <thread>

#include <json.hpp>

#include "stochq/error.hpp"

namespace stochq {

namespace {

double wrap(double x, double length) {
  const double y = x - length * std::floor(x / length);
  return y >= length ? 0.0 : y;
}

void simulate_range(const ModelSpec& model, const SimulationParams& p, TrajectoryEnsemble& out,
                    int first, int last) {
  const int dims = out.dims;
  const double noise = std::sqrt(model.noise.epsilon * p.dt);
  for (int path = first; path < last; ++path) {
    std::seed_seq seq{static_cast<std::uint32_t>(p.seed), static_cast<std::uint32_t>(p.seed >> 32),
                      static_cast<std::uint32_t>(path)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    double x[2] = {0.0, 0.0};
    double moved[2] = {0.0, 0.0};
    for (int d = 0; d < dims; ++d) x[d] = uniform(rng) * out.lengths[d];
    double* dst = out.paths.data() + static_cast<std::size_t>(path) * out.records * dims;
    long rec = 0;
    for (int d = 0; d < dims; ++d) dst[d] = x[d];
    ++rec;
    for (long step = 1; step <= p.steps; ++step) {
      const auto a = model.drift(x[0], x[1]);
      for (int d = 0; d < dims; ++d) {
        const double dx = -a[d] * p.dt + noise * gauss(rng);
        moved[d] += dx;
        x[d] = wrap(x[d] + dx, out.lengths[d]);
      }
      if (step % p.record_stride == 0) {
        for (int d = 0; d < dims; ++d) dst[rec * dims + d] = x[d];
        ++rec;
      }
    }
    for (int d = 0; d < dims; ++d) out.displacement[static_cast<std::size_t>(path) * dims + d] = moved[d];
  }
}

}  // namespace

TrajectoryEnsemble simulate_sde(const ModelSpec& model, const SimulationParams& params) {
  validate(model.noise);
  if (!model.drift || !model.mesh.is_structured()) {
    throw Error(ErrorCode::unsupported_mesh, "SDE simulation needs a structured grid with a closed-form flow");
  }
  if (!(params.dt > 0.0) || !std::isfinite(params.dt)) throw Error(ErrorCode::validation, "dt must be positive");
  if (params.steps < 1 || params.n_paths < 1 || params.record_stride < 1) {
    throw Error(ErrorCode::validation, "steps, n_paths and record_stride must be positive");
  }
  TrajectoryEnsemble out;
  out.dims = model.mesh.dimension();
  out.lengths = {model.mesh.lx(), model.mesh.ly()};
  out.epsilon = model.noise.epsilon;
  out.params = params;
  out.model = model.name;
  out.records = params.steps / params.record_stride + 1;
  const std::size_t total = static_cast<std::size_t>(params.n_paths) * out.records * out.dims;
  if (total > 400'000'000ULL) {
    throw Error(ErrorCode::capacity, "ensemble would hold " + std::to_string(total) +
                                         " values; raise record_stride");
  }
  out.paths.assign(total, 0.0);
  out.displacement.assign(static_cast<std::size_t>(params.n_paths) * out.dims, 0.0);

  const double amax = model.flow.max_magnitude();
  if (amax > 0.0) {
    const double limit = model.noise.epsilon > 0.0 ? 0.1 * model.noise.epsilon / (amax * amax) : 0.0;
    if (params.dt > limit) {
      out.warnings.push_back("dt exceeds the stability heuristic 0.1 eps / max|A|^2 = " +
                             std::to_string(limit));
    }
  }

  int threads = params.threads > 0 ? params.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, params.n_paths);
  if (threads == 1) {
    simulate_range(model, params, out, 0, params.n_paths);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (params.n_paths + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int first = t * chunk;
      const int last = std::min(params.n_paths, first + chunk);
      if (first >= last) break;
      pool.emplace_back([&, first, last] { simulate_range(model, params, out, first, last); });
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

DriftEstimate drift_estimate(const TrajectoryEnsemble& ensemble) {
  DriftEstimate out;
  const int n = ensemble.params.n_paths;
  out.elapsed = ensemble.params.dt * ensemble.params.steps;
  for (int d = 0; d < ensemble.dims; ++d) {
    double s = 0.0, s2 = 0.0, q = 0.0, q2 = 0.0;
    for (int p = 0; p < n; ++p) {
      const double disp = ensemble.displacement[static_cast<std::size_t>(p) * ensemble.dims + d];
      const double v = disp / out.elapsed;
      const double m = disp * disp;
      s += v;
      s2 += v * v;
      q += m;
      q2 += m * m;
    }
    const double mean = s / n;
    const double msd = q / n;
    const double var = n > 1 ? (s2 - n * mean * mean) / (n - 1) : 0.0;
    const double qvar = n > 1 ? (q2 - n * msd * msd) / (n - 1) : 0.0;
    out.mean_velocity.push_back(mean);
    out.velocity_stderr.push_back(std::sqrt(std::max(var, 0.0) / n));
    out.mean_square_displacement.push_back(msd);
    out.msd_stderr.push_back(std::sqrt(std::max(qvar, 0.0) / n));
  }
  return out;
}

Histogram stationary_histogram(const TrajectoryEnsemble& ensemble, int bins, double burn_in) {
  if (bins < 1) throw Error(ErrorCode::validation, "bins must be positive");
  if (!(burn_in >= 0.0 && burn_in < 1.0)) throw Error(ErrorCode::validation, "burn_in must lie in [0, 1)");
  const long first = static_cast<long>(std::ceil(burn_in * (ensemble.records - 1)));
  const long per_path = ensemble.records - first;
  const long samples = per_path * ensemble.params.n_paths;
  if (samples < 10'000) {
    throw Error(ErrorCode::statistics, "histogram needs at least 1e4 samples after burn-in, got " +
                                           std::to_string(samples));
  }
  Histogram h;
  h.dims = ensemble.dims;
  h.bins = bins;
  h.lengths = ensemble.lengths;
  h.samples = samples;
  const std::size_t cells = ensemble.dims == 1 ? bins : static_cast<std::size_t>(bins) * bins;
  std::vector<long> counts(cells, 0);
  auto bin_of = [&](double x, int d) {
    return std::min(bins - 1, static_cast<int>(x / ensemble.lengths[d] * bins));
  };
  for (int p = 0; p < ensemble.params.n_paths; ++p) {
    for (long r = first; r < ensemble.records; ++r) {
      std::size_t idx = bin_of(ensemble.at(p, r, 0), 0);
      if (ensemble.dims == 2) idx += static_cast<std::size_t>(bin_of(ensemble.at(p, r, 1), 1)) * bins;
      ++counts[idx];
    }
  }
  h.mass.resize(cells);
  for (std::size_t i = 0; i < cells; ++i) h.mass[i] = static_cast<double>(counts[i]) / samples;
  return h;
}

std::vector<double> reference_bin_mass(const Histogram& layout,
                                       const std::function<double(double, double)>& density) {
  constexpr int sub = 8;  // Simpson intervals per bin and coordinate
  auto weight = [](int i) { return i == 0 || i == sub ? 1.0 : (i % 2 ? 4.0 : 2.0); };
  const double wx = layout.bin_width(0);
  if (layout.bins < 1) throw Error(ErrorCode::validation, "bins must be positive");
  const std::size_t cells = static_cast<std::size_t>(layout.bins) * (layout.dims == 2 ? layout.bins : 1);
  std::vector<double> out(cells, 0.0);
  double total = 0.0;
  for (std::size_t c = 0; c < cells; ++c) {
    const int bx = static_cast<int>(c % layout.bins);
    const int by = static_cast<int>(c / layout.bins);
    double acc = 0.0;
    if (layout.dims == 1) {
      for (int i = 0; i <= sub; ++i) acc += weight(i) * density(bx * wx + i * wx / sub, 0.0);
    } else {
      const double wy = layout.bin_width(1);
      for (int j = 0; j <= sub; ++j) {
        for (int i = 0; i <= sub; ++i) {
          acc += weight(i) * weight(j) * density(bx * wx + i * wx / sub, by * wy + j * wy / sub);
        }
      }
    }
    out[c] = acc;
    total += acc;
  }
  for (auto& v : out) v /= total;
  return out;
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw Error(ErrorCode::invalid_argument, "distributions differ in size");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

AutocorrelationFit autocorrelation_decay(const TrajectoryEnsemble& ensemble,
                                         const AutocorrelationOptions& options) {
  using cd = std::complex<double>;
  const int paths = ensemble.params.n_paths;
  const long first = static_cast<long>(std::ceil(options.burn_in * (ensemble.records - 1)));
  const long span = ensemble.records - first;
  const double tau = ensemble.record_interval();
  long max_lag = options.max_lag > 0.0 ? static_cast<long>(options.max_lag / tau) : span / 2;
  max_lag = std::min(max_lag, span - 1);
  if (max_lag < 3) throw Error(ErrorCode::unfittable, "recorded span too short for a correlation fit");

  const double k = 2.0 * std::numbers::pi / ensemble.lengths[0];
  std::vector<cd> z(static_cast<std::size_t>(paths) * span);
  cd mean = 0.0;
  for (int p = 0; p < paths; ++p) {
    for (long r = 0; r < span; ++r) {
      const cd v = std::polar(1.0, k * ensemble.at(p, first + r, 0));
      z[static_cast<std::size_t>(p) * span + r] = v;
      mean += v;
    }
  }
  mean /= static_cast<double>(z.size());
  for (auto& v : z) v -= mean;

  const long origins = span - max_lag;
  const double work = static_cast<double>(paths) * origins * (max_lag + 1);
  const long stride = std::max(1L, static_cast<long>(std::ceil(work / options.work_budget)));

  AutocorrelationFit fit;
  fit.correlation.assign(max_lag + 1, 0.0);
  long used = 0;
  for (int p = 0; p < paths; ++p) {
    const cd* row = z.data() + static_cast<std::size_t>(p) * span;
    for (long o = 0; o < origins; o += stride) {
      const cd c0 = std::conj(row[o]);
      for (long l = 0; l <= max_lag; ++l) fit.correlation[l] += row[o + l] * c0;
      if (p == 0) ++used;
    }
  }
  for (auto& c : fit.correlation) c /= static_cast<double>(used) * paths;
  for (long l = 0; l <= max_lag; ++l) fit.lags.push_back(l * tau);

  fit.noise_floor = options.floor_factor * std::abs(fit.correlation[0]) / std::sqrt(paths);
  const long start = std::max(0L, static_cast<long>(std::ceil(options.fit_start / tau)));
  long end = start;
  while (end <= max_lag && std::abs(fit.correlation[end]) > fit.noise_floor) ++end;
  fit.fit_points = static_cast<int>(end - start);
  if (fit.fit_points < 3) {
    throw Error(ErrorCode::unfittable, "correlation is below the noise floor on the fit window");
  }
  fit.fit_start = start * tau;
  fit.fit_end = (end - 1) * tau;

  // Least squares on log|C| and on the unwrapped phase.
  double sx = 0, sy = 0, sp = 0;
  std::vector<double> xs, ys, ps;
  double phase = std::arg(fit.correlation[start]);
  for (long l = start; l < end; ++l) {
    if (l > start) {
      phase += std::arg(fit.correlation[l] / fit.correlation[l - 1]);
    }
    xs.push_back(l * tau);
    ys.push_back(std::log(std::abs(fit.correlation[l])));
    ps.push_back(phase);
    sx += xs.back();
    sy += ys.back();
    sp += ps.back();
  }
  const double m = static_cast<double>(xs.size());
  const double xbar = sx / m, ybar = sy / m, pbar = sp / m;
  double sxx = 0, sxy = 0, sxp = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - xbar) * (xs[i] - xbar);
    sxy += (xs[i] - xbar) * (ys[i] - ybar);
    sxp += (xs[i] - xbar) * (ps[i] - pbar);
  }
  const double slope = sxy / sxx;
  double ssr = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (ybar + slope * (xs[i] - xbar));
    ssr += r * r;
  }
  fit.rate = -slope;
  fit.rate_stderr = m > 2 ? std::sqrt(ssr / (m - 2) / sxx) : 0.0;
  fit.phase_slope = sxp / sxx;
  fit.frequency = std::abs(fit.phase_slope);
  return fit;
}

void dump_paths(const TrajectoryEnsemble& ensemble, const std::filesystem::path& binary,
                const std::filesystem::path& sidecar) {
  std::ofstream bin(binary, std::ios::binary);
  if (!bin) throw Error(ErrorCode::io, "cannot write " + binary.string());
  bin.write(reinterpret_cast<const char*>(ensemble.paths.data()),
            static_cast<std::streamsize>(ensemble.paths.size() * sizeof(double)));
  nlohmann::ordered_json meta;
  meta["file"] = binary.filename().string();
  meta["dtype"] = "float64";
  meta["byte_order"] = "little";
  meta["shape"] = {ensemble.params.n_paths, ensemble.records, ensemble.dims};
  meta["axes"] = {"path", "record", "coordinate"};
  meta["record_interval"] = ensemble.record_interval();
  meta["dt"] = ensemble.params.dt;
  meta["steps"] = ensemble.params.steps;
  meta["record_stride"] = ensemble.params.record_stride;
  meta["seed"] = ensemble.params.seed;
  meta["domain_lengths"] = std::vector<double>(ensemble.lengths.begin(), ensemble.lengths.begin() + ensemble.dims);
  meta["model"] = ensemble.model;
  std::ofstream side(sidecar);
  if (!side) throw Error(ErrorCode::io, "cannot write " + sidecar.string());
  side << meta.dump(2) << '\n';
}

}  // namespace stochq
