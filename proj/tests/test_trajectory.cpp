#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "stochq/trajectory_sim.hpp"
#include "support.hpp"

using namespace stochq;
using testing::error_code;

TEST_CASE("identical seeds give bit-identical ensembles regardless of threads") {
  const auto m = langevin_double_well_circle(1.0, 0.2, 32);
  SimulationParams p;
  p.steps = 200;
  p.n_paths = 37;
  p.seed = 99;
  p.threads = 1;
  const auto a = simulate_sde(m, p);
  p.threads = 4;
  const auto b = simulate_sde(m, p);
  CHECK(a.paths == b.paths);
  CHECK(a.displacement == b.displacement);
  p.seed = 100;
  const auto c = simulate_sde(m, p);
  CHECK(a.paths != c.paths);
}

TEST_CASE("recording stride and layout") {
  const auto m = torus_shear_model(1.0, 0.5, 0.2, 8);
  SimulationParams p;
  p.steps = 100;
  p.n_paths = 3;
  p.record_stride = 10;
  const auto e = simulate_sde(m, p);
  CHECK(e.dims == 2);
  CHECK(e.records == 11);
  CHECK(e.paths.size() == 3u * 11u * 2u);
  CHECK(e.record_interval() == doctest::Approx(0.1));
  for (double x : e.paths) {
    CHECK(x >= 0.0);
    CHECK(x < testing::two_pi);
  }
}

TEST_CASE("constant drive: mean velocity and diffusive spreading") {
  // dphi = -a dt + sqrt(eps) dW: velocity -a, variance of displacement eps t.
  const double a = 1.0, eps = 0.2;
  const auto m = constant_drive_circle(a, eps, 32);
  SimulationParams p;
  p.dt = 0.01;
  p.steps = 500;
  p.n_paths = 2000;
  p.seed = 4;
  p.record_stride = 500;
  const auto e = simulate_sde(m, p);
  const auto d = drift_estimate(e);
  const double t = p.dt * p.steps;
  CHECK(std::abs(d.mean_velocity[0] + a) < 4.0 * d.velocity_stderr[0]);
  const double msd = a * a * t * t + eps * t;
  CHECK(std::abs(d.mean_square_displacement[0] - msd) < 4.0 * d.msd_stderr[0]);
}

TEST_CASE("double well histogram approaches exp(-2W)") {
  const auto m = langevin_double_well_circle(1.0, 0.2, 32);
  SimulationParams p;
  p.dt = 0.02;
  p.steps = 1500;
  p.n_paths = 400;
  p.seed = 12;
  const auto e = simulate_sde(m, p);
  const auto hist = stationary_histogram(e, 32, 0.3);
  CHECK(hist.samples == 400L * 1051L);
  double total = 0.0;
  for (double x : hist.mass) total += x;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  const auto ref = reference_bin_mass(hist, m.oracle.stationary_density);
  CHECK(total_variation(hist.mass, ref) < 0.05);
}

TEST_CASE("reference bin masses integrate a known density") {
  Histogram layout;
  layout.dims = 1;
  layout.bins = 4;
  layout.lengths = {testing::two_pi, 0.0};
  const auto mass = reference_bin_mass(layout, [](double x, double) { return 1.0 + std::cos(x); });
  // Integral of 1 + cos over [0, pi/2] is pi/2 + 1, total 2 pi. Simpson with
  // eight sub-intervals per bin is good to about 2e-5 here.
  CHECK(mass.size() == 4);
  CHECK(mass[0] == doctest::Approx((M_PI / 2 + 1) / testing::two_pi).epsilon(1e-4));
  CHECK(mass[1] == doctest::Approx((M_PI / 2 - 1) / testing::two_pi).epsilon(1e-4));
  CHECK(total_variation({0.5, 0.5}, {1.0, 0.0}) == doctest::Approx(0.5));
  CHECK(error_code([] { total_variation({1.0}, {0.5, 0.5}); }) == ErrorCode::invalid_argument);
}

TEST_CASE("too few samples is a statistics error") {
  const auto m = constant_drive_circle(1.0, 0.2, 16);
  SimulationParams p;
  p.steps = 100;
  p.n_paths = 10;
  const auto e = simulate_sde(m, p);
  CHECK(error_code([&] { stationary_histogram(e, 16); }) == ErrorCode::statistics);
}

TEST_CASE("autocorrelation of the first Fourier mode decays at eps/2 and rotates at a") {
  const double a = 1.0, eps = 0.2;
  const auto m = constant_drive_circle(a, eps, 32);
  SimulationParams p;
  p.dt = 0.01;
  p.steps = 3000;
  p.n_paths = 1500;
  p.seed = 21;
  p.record_stride = 10;
  const auto e = simulate_sde(m, p);
  const auto fit = autocorrelation_decay(e);
  CHECK(fit.fit_points >= 3);
  CHECK(fit.rate == doctest::Approx(eps / 2).epsilon(0.15));
  CHECK(fit.frequency == doctest::Approx(a).epsilon(0.15));
  CHECK(fit.rate > -fit.rate_stderr);
}

TEST_CASE("unfittable and invalid simulations") {
  const auto m = constant_drive_circle(1.0, 0.2, 16);
  SimulationParams p;
  p.steps = 4;
  p.n_paths = 5;
  const auto e = simulate_sde(m, p);
  CHECK(error_code([&] { autocorrelation_decay(e); }) == ErrorCode::unfittable);
  p.dt = -1.0;
  CHECK(error_code([&] { simulate_sde(m, p); }) == ErrorCode::validation);
  p.dt = 0.01;
  p.n_paths = 2000000;
  p.steps = 1000;
  CHECK(error_code([&] { simulate_sde(m, p); }) == ErrorCode::capacity);
  const auto sphere = sphere_diffusion(1, 1.0);
  CHECK(error_code([&] { simulate_sde(sphere, SimulationParams{}); }) == ErrorCode::unsupported_mesh);
}

TEST_CASE("a coarse time step raises a stability warning") {
  const auto m = langevin_double_well_circle(1.0, 0.05, 32);
  SimulationParams p;
  p.dt = 1.0;
  p.steps = 10;
  p.n_paths = 2;
  CHECK_FALSE(simulate_sde(m, p).warnings.empty());
}

TEST_CASE("raw path dump round trips") {
  const auto m = torus_shear_model(1.0, 0.5, 0.2, 8);
  SimulationParams p;
  p.steps = 20;
  p.n_paths = 3;
  p.record_stride = 5;
  const auto e = simulate_sde(m, p);
  const auto dir = std::filesystem::temp_directory_path() / "stochq_dump_test";
  std::filesystem::create_directories(dir);
  dump_paths(e, dir / "paths.bin", dir / "paths.json");
  std::ifstream bin(dir / "paths.bin", std::ios::binary);
  std::vector<double> back(e.paths.size());
  bin.read(reinterpret_cast<char*>(back.data()), static_cast<std::streamsize>(back.size() * sizeof(double)));
  CHECK(bin.gcount() == static_cast<std::streamsize>(back.size() * sizeof(double)));
  CHECK(back == e.paths);
  std::ifstream side(dir / "paths.json");
  const auto j = nlohmann::json::parse(side);
  CHECK(j["dtype"] == "float64");
  CHECK(j["shape"] == nlohmann::json::array({3, 5, 2}));
  std::filesystem::remove_all(dir);
}

TEST_CASE("statistics are stable under re-seeding") {
  const auto well = langevin_double_well_circle(1.0, 0.2, 32);
  const auto drive = constant_drive_circle(1.0, 0.2, 32);
  for (std::uint64_t seed : {101u, 202u, 303u}) {
    CAPTURE(seed);
    SimulationParams p;
    p.dt = 0.02;
    p.steps = 1500;
    p.n_paths = 400;
    p.seed = seed;
    const auto e = simulate_sde(well, p);
    const auto hist = stationary_histogram(e, 32, 0.3);
    CHECK(total_variation(hist.mass, reference_bin_mass(hist, well.oracle.stationary_density)) < 0.05);

    SimulationParams q;
    q.dt = 0.01;
    q.steps = 3000;
    q.n_paths = 1000;
    q.seed = seed;
    q.record_stride = 10;
    const auto fit = autocorrelation_decay(simulate_sde(drive, q));
    CHECK(fit.rate == doctest::Approx(0.1).epsilon(0.15));
    CHECK(fit.frequency == doctest::Approx(1.0).epsilon(0.15));
    CHECK(fit.rate > -fit.rate_stderr);
  }
}
