#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "enaqt/config.hpp"
#include "enaqt/runner.hpp"

using namespace enaqt;

namespace {

const char* kFixtureScenario =
    "algorithm = lindblad\n"
    "network.energies = 0.44, 0.24, -3.22, 0.36\n"
    "network.topology = ring\n"
    "network.gamma = 0.1\n"
    "grid.dt = 0.02\n"
    "grid.steps = 100\n"
    "source = 1\n"
    "target = 3\n";

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "enaqt_harness" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

nlohmann::json manifest_of(const std::filesystem::path& dir) {
  return nlohmann::json::parse(slurp(dir / "manifest.json"));
}

}  // namespace

TEST_CASE("scenario parsing applies defaults and expands the topology", "[harness][config]") {
  const ScenarioConfig cfg = parse_scenario(kFixtureScenario);
  REQUIRE(cfg.algorithm == Algorithm::Lindblad);
  REQUIRE(cfg.mapping == Mapping::Physical);
  REQUIRE(cfg.network.site_count() == 4);
  REQUIRE(cfg.network.edges.size() == 4);
  for (const auto& e : cfg.network.edges) REQUIRE(e.coupling == 1.0);
  REQUIRE(cfg.network.dephasing_rates == std::vector<double>(4, 0.1));
  REQUIRE(cfg.grid.steps == 100);
  REQUIRE(cfg.grid.delta_tau == 0.02);
  REQUIRE(cfg.grid.shots_per_point == 1);
  REQUIRE(cfg.trajectories == 200);
  REQUIRE(cfg.seed == 1);
  REQUIRE(cfg.readout == ReadoutMode::ExactProbability);
  REQUIRE(!cfg.sweep.enabled);

  // horizon form: default horizon 40 when only dt is given
  const ScenarioConfig horizon_cfg = parse_scenario(
      "network.energies = 0, 0\nnetwork.edges = 1-2\ngrid.dt = 0.01\n");
  REQUIRE(horizon_cfg.grid.steps == 4000);
}

TEST_CASE("scenario serialization round trips exactly", "[harness][config]") {
  const char* text =
      "algorithm = classical_noise\n"
      "mapping = algorithmic\n"
      "network.energies = 0.44, 0.24, -3.22, 0.36\n"
      "network.edges = 1-2:0.5, 2-3, 3-4:1.25, 1-4\n"
      "network.gamma = 0.1, 0.2, 0.3, 0.4\n"
      "noise.kind = ou\n"
      "noise.lambda = 2.5\n"
      "noise.propagator = split\n"
      "grid.dt = 0.02\n"
      "grid.steps = 50\n"
      "grid.shots = 3\n"
      "readout = single_shot\n"
      "trajectories = 11\n"
      "source = 2\n"
      "target = 4\n"
      "sweep.min = 0.01\n"
      "sweep.max = 10\n"
      "sweep.points = 5\n"
      "seed = 99\n";
  const ScenarioConfig cfg = parse_scenario(text);
  REQUIRE(cfg.network.edges[1].coupling == 1.0);  // bare a-b edge defaults to V = 1
  const std::string s1 = serialize_scenario(cfg);
  const ScenarioConfig cfg2 = parse_scenario(s1);
  REQUIRE(serialize_scenario(cfg2) == s1);
  REQUIRE(scenario_hash(cfg2) == scenario_hash(cfg));
}

TEST_CASE("scenario parsing rejects malformed input", "[harness][config]") {
  REQUIRE_THROWS_AS(parse_scenario("bogus = 1\n"), ConfigError);
  REQUIRE_THROWS_AS(parse_scenario("network.sites = 2\nnetwork.edges = 12\n"), ConfigError);
  REQUIRE_THROWS_AS(
      parse_scenario("network.sites = 2\nnetwork.edges = 1-2\nnetwork.topology = ring\n"),
      ConfigError);
  REQUIRE_THROWS_AS(parse_scenario("network.sites = 3\nnetwork.topology = star\n"), ConfigError);
  REQUIRE_THROWS_AS(parse_scenario("network.topology = ring\n"), ConfigError);  // no site count
  REQUIRE_THROWS_AS(parse_scenario("network.sites = 2\nnetwork.edges = 1-2\ngrid.dt = abc\n"),
                    ConfigError);
  REQUIRE_THROWS_AS(
      parse_scenario("network.sites = 2\nnetwork.edges = 1-2\nnetwork.gamma = 1, 2, 3\n"),
      ConfigError);
  // collision algorithms are pinned to their mapping
  REQUIRE_THROWS_AS(
      parse_scenario("algorithm = collision\nmapping = algorithmic\n"
                     "network.sites = 2\nnetwork.edges = 1-2\n"),
      ConfigError);
  REQUIRE_THROWS_AS(
      parse_scenario("noise.kind = ou\nnetwork.sites = 2\nnetwork.edges = 1-2\n"),
      ConfigError);  // ou requires a positive lambda
}

TEST_CASE("static disorder expansion is frozen by its seed", "[harness][config]") {
  const char* base =
      "network.sites = 4\nnetwork.topology = ring\nnetwork.disorder_sigma = 2.0\n";
  const ScenarioConfig a = parse_scenario(std::string(base) + "network.disorder_seed = 7\n");
  const ScenarioConfig b = parse_scenario(std::string(base) + "network.disorder_seed = 7\n");
  const ScenarioConfig c = parse_scenario(std::string(base) + "network.disorder_seed = 8\n");
  REQUIRE(a.network.site_energies == b.network.site_energies);
  REQUIRE(a.network.site_energies != c.network.site_energies);
  REQUIRE(std::abs(a.network.site_energies[0]) > 0.0);
}

TEST_CASE("scenario hash ignores the seed; the ensemble master does not", "[harness][config]") {
  ScenarioConfig a = parse_scenario(kFixtureScenario);
  ScenarioConfig b = a;
  b.seed = 123456;
  REQUIRE(scenario_hash(a) == scenario_hash(b));
  REQUIRE(ensemble_master(a) != ensemble_master(b));
  ScenarioConfig c = a;
  c.target = 4;
  REQUIRE(scenario_hash(c) != scenario_hash(a));
}

TEST_CASE("sweep grid is log spaced with the documented defaults", "[harness][config]") {
  SweepSpec sweep;
  sweep.enabled = true;
  const std::vector<double> g = sweep.grid_values();
  REQUIRE(g.size() == 16);
  REQUIRE(g.front() == Catch::Approx(1e-3).epsilon(1e-12));
  REQUIRE(g.back() == Catch::Approx(1e2).epsilon(1e-12));
  for (std::size_t i = 2; i < g.size(); ++i) {
    REQUIRE(g[i] / g[i - 1] == Catch::Approx(g[1] / g[0]).epsilon(1e-9));
  }
  sweep.points = 1;
  REQUIRE_THROWS_AS(sweep.validate(), ConfigError);
}

TEST_CASE("sweep points shrink the step to respect the gamma dt cap", "[harness]") {
  const SimulationGrid base = SimulationGrid::from_horizon(40.0, 0.01);
  const SimulationGrid weak = sweep_point_grid(base, 1.0, 0.08);
  REQUIRE(weak.delta_tau == base.delta_tau);
  REQUIRE(weak.steps == base.steps);
  const SimulationGrid strong = sweep_point_grid(base, 100.0, 0.08);
  REQUIRE(100.0 * strong.delta_tau <= 0.08 + 1e-12);
  REQUIRE(strong.steps * strong.delta_tau == Catch::Approx(40.0).epsilon(1e-12));
  const SimulationGrid uncapped = sweep_point_grid(base, 100.0, 0.0);
  REQUIRE(uncapped.delta_tau == base.delta_tau);
}

TEST_CASE("deterministic dynamics reports the oracle as its own estimate", "[harness]") {
  const ScenarioConfig cfg = parse_scenario(kFixtureScenario);
  const DynamicsResult r = compute_dynamics(cfg);
  REQUIRE(!r.stochastic);
  REQUIRE(r.eta == r.eta_oracle);
  REQUIRE(r.series.mean == r.oracle);
  for (double se : r.series.std_error) REQUIRE(se == 0.0);
  REQUIRE(r.series.times.size() == 101);
}

TEST_CASE("dynamics outputs are byte-identical across reruns", "[harness][io]") {
  ScenarioConfig cfg = parse_scenario(kFixtureScenario);
  cfg.algorithm = Algorithm::ClassicalNoise;
  cfg.mapping = Mapping::Algorithmic;
  cfg.trajectories = 8;
  const auto dir_a = scratch("dyn_a");
  const auto dir_b = scratch("dyn_b");
  run_dynamics(cfg, dir_a.string());
  run_dynamics(cfg, dir_b.string());
  const std::string csv_a = slurp(dir_a / "dynamics.csv");
  REQUIRE(csv_a == slurp(dir_b / "dynamics.csv"));
  const auto man_a = manifest_of(dir_a);
  const auto man_b = manifest_of(dir_b);
  REQUIRE(man_a["outputs"] == man_b["outputs"]);
  REQUIRE(man_a["summary"] == man_b["summary"]);
  // the recorded checksum covers the file bytes
  REQUIRE(man_a["outputs"]["dynamics.csv"]["fnv1a64"] ==
          detail::hex64(fnv1a64(csv_a.data(), csv_a.size())));
  REQUIRE(man_a["outputs"]["dynamics.csv"]["rows"] == 101);
  REQUIRE(man_a["config"] == serialize_scenario(cfg));
  // a different seed changes the stochastic series
  cfg.seed = 2;
  const auto dir_c = scratch("dyn_c");
  run_dynamics(cfg, dir_c.string());
  REQUIRE(csv_a != slurp(dir_c / "dynamics.csv"));
}

TEST_CASE("sweep output carries one row per grid point", "[harness][io]") {
  ScenarioConfig cfg = parse_scenario(kFixtureScenario);
  cfg.sweep.enabled = true;
  cfg.sweep.min_gamma = 0.1;
  cfg.sweep.max_gamma = 10.0;
  cfg.sweep.points = 4;
  const auto dir = scratch("sweep");
  run_sweep(cfg, dir.string());
  const std::string csv = slurp(dir / "sweep.csv");
  REQUIRE(csv.rfind("gamma,delta_tau,eta,eta_stderr,eta_oracle\n", 0) == 0);
  REQUIRE(manifest_of(dir)["outputs"]["sweep.csv"]["rows"] == 4);
  const std::vector<EfficiencyPoint> pts = compute_sweep(cfg);
  REQUIRE(pts.size() == 4);
  for (const auto& p : pts) {
    REQUIRE(p.eta == p.eta_oracle);  // lindblad sweep: estimator is the oracle
    REQUIRE(p.gamma * p.delta_tau <= cfg.sweep.gamma_dt_cap + 1e-12);
  }
  ScenarioConfig plain = parse_scenario(kFixtureScenario);
  REQUIRE_THROWS_AS(compute_sweep(plain), ConfigError);
}

TEST_CASE("recorded collision trajectories replay byte-identically", "[harness][io]") {
  ScenarioConfig cfg = parse_scenario(kFixtureScenario);
  cfg.algorithm = Algorithm::Collision;
  cfg.trajectories = 5;
  const auto dir_t = scratch("traj");
  const auto dir_r = scratch("replay");
  run_trajectories(cfg, dir_t.string(), true);
  REQUIRE(std::filesystem::exists(dir_t / "trajectories.csv"));
  REQUIRE(std::filesystem::exists(dir_t / "mean.csv"));
  REQUIRE(std::filesystem::exists(dir_t / "bits.txt"));
  run_replay(cfg, (dir_t / "bits.txt").string(), dir_r.string());
  const std::string original = slurp(dir_t / "trajectories.csv");
  const std::string replayed = slurp(dir_r / "replayed.csv");
  REQUIRE(original == replayed);
  REQUIRE(manifest_of(dir_r)["summary"]["replayed_trajectories"] == 5);
}

TEST_CASE("trajectory and replay preconditions", "[harness]") {
  ScenarioConfig cfg = parse_scenario(kFixtureScenario);
  REQUIRE_THROWS_AS(run_trajectories(cfg, scratch("bad1").string(), false), ConfigError);
  cfg.algorithm = Algorithm::ClassicalNoise;
  cfg.mapping = Mapping::Algorithmic;
  REQUIRE_THROWS_AS(run_trajectories(cfg, scratch("bad2").string(), true), ConfigError);
  REQUIRE_THROWS_AS(run_replay(cfg, "/nonexistent/bits.txt", scratch("bad3").string()),
                    ConfigError);
  ScenarioConfig col = parse_scenario(kFixtureScenario);
  col.algorithm = Algorithm::Collision;
  REQUIRE_THROWS_AS(run_replay(col, "/nonexistent/bits.txt", scratch("bad4").string()),
                    ConfigError);
}

TEST_CASE("deterministic integrator convergence is already tight", "[harness]") {
  const ScenarioConfig cfg = parse_scenario(kFixtureScenario);
  const ConvergenceReport rep = compute_convergence(cfg, 2);
  REQUIRE(rep.levels.size() == 3);
  REQUIRE(rep.levels[0].max_abs_change == 0.0);
  for (std::size_t l = 1; l < rep.levels.size(); ++l) {
    REQUIRE(rep.levels[l].max_abs_change < 1e-4);
  }
  REQUIRE_THROWS_AS(compute_convergence(cfg, 0), ConfigError);
}

TEST_CASE("collision convergence is first order in the step", "[harness]") {
  ScenarioConfig cfg = parse_scenario(kFixtureScenario);
  cfg.algorithm = Algorithm::Collision;
  cfg.grid = SimulationGrid::from_horizon(1.0, 0.02);
  const ConvergenceReport rep = compute_convergence(cfg, 2);
  REQUIRE(rep.order_defined);
  REQUIRE(rep.fitted_order > 0.75);
  REQUIRE(rep.fitted_order < 1.25);

  cfg.algorithm = Algorithm::CollisionAlgorithmic;
  cfg.mapping = Mapping::Algorithmic;
  // The exact-expm channel has a tiny splitting coefficient at gamma = 0.1, so
  // the clean first-order regime needs a finer base step than the gate form.
  cfg.grid = SimulationGrid::from_horizon(1.0, 0.005);
  const ConvergenceReport rep2 = compute_convergence(cfg, 2);
  REQUIRE(rep2.order_defined);
  REQUIRE(rep2.fitted_order > 0.75);
  REQUIRE(rep2.fitted_order < 1.25);

  const auto dir = scratch("conv");
  run_converge(cfg, 2, dir.string());
  REQUIRE(manifest_of(dir)["outputs"]["convergence.csv"]["rows"] == 3);
}

TEST_CASE("scaling rows carry the closed-form gate counts", "[harness]") {
  const auto ring = compute_scaling({4, 8}, "ring", Mapping::Physical, Algorithm::Collision);
  REQUIRE(ring[0].qubits == 5);
  REQUIRE(ring[0].gates_per_block == 20);  // 5N on a ring
  REQUIRE(ring[1].gates_per_block == 40);
  REQUIRE(!ring[0].estimate);

  const auto full = compute_scaling({4, 8}, "complete", Mapping::Physical, Algorithm::Collision);
  REQUIRE(full[0].gates_per_block == 24);  // 3N + N(N-1)
  REQUIRE(full[1].gates_per_block == 80);

  const auto algo =
      compute_scaling({4}, "ring", Mapping::Algorithmic, Algorithm::CollisionAlgorithmic);
  REQUIRE(algo[0].qubits == 3);  // ceil(log2 4) + coin
  REQUIRE(algo[0].gates_per_block == 16 + 4 * 4);
  REQUIRE(algo[0].estimate);

  const auto noise =
      compute_scaling({4}, "ring", Mapping::Physical, Algorithm::ClassicalNoise, 2);
  REQUIRE(noise[0].qubits == 4);
  REQUIRE(noise[0].gates_per_block == 2 * (4 + 8) + 4);

  REQUIRE_THROWS_AS(compute_scaling({4}, "ring", Mapping::Physical, Algorithm::Lindblad),
                    ConfigError);
  REQUIRE_THROWS_AS(compute_scaling({1}, "ring", Mapping::Physical, Algorithm::Collision),
                    ConfigError);
  REQUIRE_THROWS_AS(compute_scaling({4}, "torus", Mapping::Physical, Algorithm::Collision),
                    ConfigError);

  const auto dir = scratch("scaling");
  run_scaling({4, 6}, "ring", Mapping::Physical, Algorithm::Collision, 1, dir.string());
  const std::string csv = slurp(dir / "scaling.csv");
  REQUIRE(csv.find("4,5,20,measured") != std::string::npos);
  REQUIRE(csv.find("6,7,30,measured") != std::string::npos);
}

TEST_CASE("scenario files load through the same parser", "[harness][config][io]") {
  const auto dir = scratch("cfgfile");
  const auto path = dir / "scenario.cfg";
  {
    std::ofstream out(path);
    out << "# comment line\n" << kFixtureScenario;
  }
  const ScenarioConfig cfg = load_scenario_file(path.string());
  REQUIRE(serialize_scenario(cfg) == serialize_scenario(parse_scenario(kFixtureScenario)));
  REQUIRE_THROWS_AS(load_scenario_file((dir / "missing.cfg").string()), ConfigError);
}
