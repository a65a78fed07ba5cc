#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "enaqt/grid.hpp"
#include "enaqt/lindblad.hpp"
#include "enaqt/linalg.hpp"
#include "enaqt/network.hpp"
#include "enaqt/noise.hpp"
#include "enaqt/random.hpp"

using namespace enaqt;

TEST_CASE("white noise draws have the requested moments and are independent", "[noise]") {
  const NoiseConfig cfg = NoiseConfig::white({0.7, 0.2, 1.5});
  RandomStream rng(2024);
  const int m = 100000;
  std::vector<double> mean(3, 0.0), var(3, 0.0);
  double cross01 = 0.0, cross12 = 0.0;
  for (int k = 0; k < m; ++k) {
    const auto de = sample_white_noise(cfg, rng, 3);
    for (int j = 0; j < 3; ++j) {
      mean[j] += de[j];
      var[j] += de[j] * de[j];
    }
    cross01 += de[0] * de[1];
    cross12 += de[1] * de[2];
  }
  for (int j = 0; j < 3; ++j) {
    const double v = cfg.variances[j];
    mean[j] /= m;
    var[j] = var[j] / m - mean[j] * mean[j];
    REQUIRE(std::abs(mean[j]) < 5.0 * std::sqrt(v / m));
    REQUIRE(std::abs(var[j] - v) < 5.0 * v * std::sqrt(2.0 / m));
  }
  REQUIRE(std::abs(cross01 / m) < 5.0 * std::sqrt(0.7 * 0.2 / m));
  REQUIRE(std::abs(cross12 / m) < 5.0 * std::sqrt(0.2 * 1.5 / m));
}

TEST_CASE("ornstein-uhlenbeck chain is stationary with exponential autocorrelation",
          "[noise]") {
  const double omega_sq = 2.0, lambda = 3.0, dt = 0.05;
  const NoiseConfig cfg = NoiseConfig::ornstein_uhlenbeck({omega_sq}, lambda);
  RandomStream rng(77);
  const int m = 400000;
  std::vector<double> chain;
  chain.reserve(m);
  std::vector<double> de = ou_init(cfg, rng, 1);
  for (int k = 0; k < m; ++k) {
    chain.push_back(de[0]);
    de = ou_step(de, cfg, dt, rng);
  }
  double mean = 0.0, var = 0.0;
  for (double v : chain) mean += v;
  mean /= m;
  for (double v : chain) var += (v - mean) * (v - mean);
  var /= m;
  REQUIRE(std::abs(mean) < 0.05);
  REQUIRE(std::abs(var - omega_sq) < 0.15);
  for (int lag : {1, 5, 10}) {
    double acc = 0.0;
    for (int k = 0; k + lag < m; ++k) acc += chain[k] * chain[k + lag];
    const double rho = acc / (m - lag) / var;
    REQUIRE(std::abs(rho - std::exp(-lambda * dt * lag)) < 0.01);
  }
}

TEST_CASE("split propagator error scales as dt^(3/2)", "[noise]") {
  const ComplexMatrix h = site_hamiltonian(ring4_disordered(0.0));
  RealVector f(4);
  f << 1.3, -0.7, 0.4, -1.1;
  auto err = [&](double dt) {
    return max_abs(step_propagator(h, f, dt, PropagatorMode::Exact) -
                   step_propagator(h, f, dt, PropagatorMode::Split));
  };
  const double ratio = err(0.02) / err(0.005);  // dt / 4 => error / 8
  REQUIRE(ratio > 6.5);
  REQUIRE(ratio < 9.5);
}

TEST_CASE("zero-variance noise reproduces the unitary walk", "[noise]") {
  const ExcitonNetwork net = ring4_disordered(0.0);
  const SimulationGrid grid = SimulationGrid::from_horizon(5.0, 0.05);
  const NoiseTrajectoryEngine engine(net, Mapping::Algorithmic, NoiseConfig::white({0.0}), grid,
                                     1, 3);
  const TrajectoryRecord rec = engine.run(RandomStream(5), ReadoutMode::ExactProbability);
  const ComplexMatrix h = site_hamiltonian(net);
  for (long s = 0; s <= grid.steps; s += 20) {
    const ComplexMatrix u = hermitian_expm(h, s * grid.delta_tau);
    REQUIRE(std::abs(rec.estimator[static_cast<std::size_t>(s)] - std::norm(u(2, 0))) < 1e-10);
  }
}

TEST_CASE("physical and algorithmic mappings give identical estimators", "[noise]") {
  const ExcitonNetwork net = ring4_disordered(0.0);
  const SimulationGrid grid = SimulationGrid::from_horizon(2.0, 0.02);
  const NoiseConfig white = NoiseConfig::white({0.3});
  for (PropagatorMode mode : {PropagatorMode::Exact, PropagatorMode::Split}) {
    const NoiseTrajectoryEngine phys(net, Mapping::Physical, white, grid, 1, 3, mode);
    const NoiseTrajectoryEngine algo(net, Mapping::Algorithmic, white, grid, 1, 3, mode);
    const TrajectoryRecord a = phys.run(RandomStream(11), ReadoutMode::ExactProbability);
    const TrajectoryRecord b = algo.run(RandomStream(11), ReadoutMode::ExactProbability);
    REQUIRE(a.estimator.size() == b.estimator.size());
    for (std::size_t s = 0; s < a.estimator.size(); ++s) {
      REQUIRE(std::abs(a.estimator[s] - b.estimator[s]) < 1e-12);
    }
  }
}

TEST_CASE("engine split path matches the generic split propagator", "[noise]") {
  const ExcitonNetwork net = ring4_disordered(0.0);
  SimulationGrid grid = SimulationGrid::from_horizon(1.0, 0.02);
  const NoiseConfig cfg = NoiseConfig::ornstein_uhlenbeck({0.8}, 2.0);
  const NoiseTrajectoryEngine engine(net, Mapping::Algorithmic, cfg, grid, 1, 3,
                                     PropagatorMode::Split);
  RandomStream rng(31);
  const TrajectoryRecord rec = engine.run(rng, ReadoutMode::ExactProbability);

  // replay the identical stream through step_propagator directly
  RandomStream replay(31);
  const ComplexMatrix h = engine.hamiltonian;
  ComplexVector psi = ComplexVector::Zero(4);
  psi[0] = 1.0;
  std::vector<double> de = ou_init(cfg, replay, 4);
  REQUIRE(std::abs(rec.estimator[0] - std::norm(psi[2])) < 1e-15);
  for (long s = 1; s <= grid.steps; ++s) {
    de = ou_step(de, cfg, grid.delta_tau, replay);
    RealVector f(4);
    for (int j = 0; j < 4; ++j) f[j] = de[static_cast<std::size_t>(j)] * engine.fluct_prescale;
    psi = (step_propagator(h, f, grid.delta_tau, PropagatorMode::Split) * psi).eval();
    REQUIRE(std::abs(rec.estimator[static_cast<std::size_t>(s)] - std::norm(psi[2])) < 1e-12);
  }
}

TEST_CASE("identical streams give identical trajectories", "[noise]") {
  const ExcitonNetwork net = ring4_disordered(0.1);
  const SimulationGrid grid = SimulationGrid::from_horizon(2.0, 0.02);
  const NoiseTrajectoryEngine engine(net, Mapping::Algorithmic,
                                     NoiseConfig::white_from_rates(net.dephasing_rates), grid, 1,
                                     3);
  const TrajectoryRecord a = engine.run(RandomStream(9), ReadoutMode::ExactProbability);
  const TrajectoryRecord b = engine.run(RandomStream(9), ReadoutMode::ExactProbability);
  REQUIRE(a.estimator == b.estimator);
  const TrajectoryRecord c = engine.run(RandomStream(10), ReadoutMode::ExactProbability);
  REQUIRE(a.estimator != c.estimator);
}

TEST_CASE("batched ensemble reduction matches the materialized reduction exactly", "[noise]") {
  const ExcitonNetwork net = ring4_disordered(0.1);
  const SimulationGrid grid = SimulationGrid::from_horizon(1.0, 0.02);
  const NoiseTrajectoryEngine engine(net, Mapping::Algorithmic,
                                     NoiseConfig::white_from_rates(net.dephasing_rates), grid, 1,
                                     3);
  const std::uint64_t master = 4242;
  const AveragedSeries batched =
      run_noise_ensemble(engine, 23, master, ReadoutMode::ExactProbability, 7);
  const auto records = run_noise_records(engine, 23, master, ReadoutMode::ExactProbability);
  const AveragedSeries direct = ensemble_average(records, grid.delta_tau, 1, 3);
  REQUIRE(batched.count == 23);
  REQUIRE(batched.mean == direct.mean);
  REQUIRE(batched.std_error == direct.std_error);
  REQUIRE(batched.efficiency == direct.efficiency);
  REQUIRE(batched.efficiency_stderr == direct.efficiency_stderr);
}

TEST_CASE("noise ensemble tracks the dephasing master equation", "[noise][slow]") {
  const ExcitonNetwork net = ring4_disordered(0.1);
  const SimulationGrid grid = SimulationGrid::from_horizon(10.0, 0.01);
  const NoiseTrajectoryEngine engine(net, Mapping::Algorithmic,
                                     NoiseConfig::white_from_rates(net.dephasing_rates), grid, 1,
                                     3);
  const AveragedSeries avg = run_noise_ensemble(engine, 600, 7, ReadoutMode::ExactProbability);
  const auto oracle = integrate_master_equation(site_dephasing_problem(net, 1), grid);
  for (std::size_t s : {100u, 300u, 600u, 1000u}) {
    const double band = 5.0 * avg.std_error[s] + 0.003;  // sampling + O(dt) bias
    REQUIRE(std::abs(avg.mean[s] - oracle.series.populations[s][2]) < band);
  }
}

TEST_CASE("single-shot readout is unbiased but noisier", "[noise][slow]") {
  const ExcitonNetwork net = ring4_disordered(0.1);
  SimulationGrid grid = SimulationGrid::from_horizon(10.0, 0.01);
  grid.shots_per_point = 1;
  const NoiseTrajectoryEngine engine(net, Mapping::Algorithmic,
                                     NoiseConfig::white_from_rates(net.dephasing_rates), grid, 1,
                                     3);
  const AveragedSeries shot = run_noise_ensemble(engine, 400, 21, ReadoutMode::SingleShot);
  const AveragedSeries exact = run_noise_ensemble(engine, 400, 21, ReadoutMode::ExactProbability);
  const auto oracle = integrate_master_equation(site_dephasing_problem(net, 1), grid);
  for (std::size_t s : {200u, 700u}) {
    REQUIRE(std::abs(shot.mean[s] - oracle.series.populations[s][2]) <
            5.0 * shot.std_error[s] + 0.003);
    REQUIRE(shot.std_error[s] > exact.std_error[s]);
  }
  // per-sample shot noise is independent across time, so it largely averages
  // out of the efficiency integral; the two estimates must agree within errors
  REQUIRE(std::abs(shot.efficiency - exact.efficiency) <
          4.0 * (shot.efficiency_stderr + exact.efficiency_stderr));
}

TEST_CASE("fast ornstein-uhlenbeck noise approaches the white-noise master equation",
          "[noise][slow]") {
  const ExcitonNetwork net = ring4_disordered(0.1);
  const SimulationGrid grid = SimulationGrid::from_horizon(10.0, 0.01);
  // gamma_eff = 2 omega^2 / Lambda = 0.1
  const NoiseConfig ou = NoiseConfig::ornstein_uhlenbeck({1.0}, 20.0);
  const NoiseTrajectoryEngine engine(net, Mapping::Algorithmic, ou, grid, 1, 3);
  const AveragedSeries avg = run_noise_ensemble(engine, 400, 13, ReadoutMode::ExactProbability);
  const auto oracle = integrate_master_equation(site_dephasing_problem(net, 1), grid);
  for (std::size_t s : {300u, 600u, 1000u}) {
    REQUIRE(std::abs(avg.mean[s] - oracle.series.populations[s][2]) < 0.04);
  }
}

TEST_CASE("a single noisy trajectory does not equilibrate pointwise", "[noise]") {
  const ExcitonNetwork net = ring4_disordered(0.1);
  const SimulationGrid grid = SimulationGrid::from_horizon(100.0, 0.01);
  const NoiseTrajectoryEngine engine(net, Mapping::Algorithmic,
                                     NoiseConfig::white_from_rates(net.dephasing_rates), grid, 1,
                                     3);
  const TrajectoryRecord rec = engine.run(RandomStream(3), ReadoutMode::ExactProbability);
  double dev = 0.0;
  for (std::size_t s = 5000; s < rec.estimator.size(); ++s) {
    dev = std::max(dev, std::abs(rec.estimator[s] - 0.25));
  }
  REQUIRE(dev > 0.02);
}

TEST_CASE("noise configuration and engine validation", "[noise]") {
  REQUIRE_THROWS_AS(NoiseConfig::white({0.1, 0.2}).validate(3), ConfigError);
  REQUIRE_THROWS_AS(NoiseConfig::white({-0.1}).validate(2), ConfigError);
  REQUIRE_THROWS_AS(NoiseConfig::ornstein_uhlenbeck({0.1}, -1.0).validate(1), ConfigError);

  const ExcitonNetwork net = ring4_disordered(0.1);
  const SimulationGrid grid = SimulationGrid::from_horizon(1.0, 0.1);
  REQUIRE_THROWS_AS(NoiseTrajectoryEngine(net, Mapping::Algorithmic, NoiseConfig::white({0.1}),
                                          grid, 0, 3),
                    ConfigError);
  REQUIRE_THROWS_AS(NoiseTrajectoryEngine(net, Mapping::Algorithmic, NoiseConfig::white({0.1}),
                                          grid, 1, 5),
                    ConfigError);

  RealVector f(3);
  f << 1.0, 2.0, 3.0;
  REQUIRE_THROWS_AS(step_propagator(ComplexMatrix::Identity(4, 4), f, 0.1, PropagatorMode::Exact),
                    ConfigError);
}
