#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "enaqt/runner.hpp"

namespace {

using namespace enaqt;

struct Overrides {
  std::string config_path;
  std::string out;
  std::string algorithm;
  std::string mapping;
  std::string readout;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double dt = 0.0;
  double horizon = 0.0;
  long trajectories = 0;
  long shots = 0;
  int substeps = 0;
  double gamma = -1.0;
};

void add_common_options(CLI::App* sub, Overrides& ov) {
  sub->add_option("--config", ov.config_path, "scenario file (key = value lines)")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--out", ov.out, "output directory (default: the config's 'out')");
  sub->add_option("--seed", ov.seed, "override the master seed")
      ->each([&ov](const std::string&) { ov.seed_set = true; });
  sub->add_option("--algorithm", ov.algorithm,
                  "override: lindblad | classical_noise | collision | collision_algorithmic");
  sub->add_option("--mapping", ov.mapping, "override: physical | algorithmic");
  sub->add_option("--readout", ov.readout, "override: exact | single_shot");
  sub->add_option("--dt", ov.dt, "override the time step");
  sub->add_option("--horizon", ov.horizon, "override the horizon T");
  sub->add_option("--trajectories", ov.trajectories, "override the trajectory count");
  sub->add_option("--shots", ov.shots, "override shots per sample point");
  sub->add_option("--substeps", ov.substeps, "override Trotter substeps per block");
  sub->add_option("--gamma", ov.gamma, "override with a uniform dephasing rate");
}

ScenarioConfig load_with_overrides(const Overrides& ov) {
  ScenarioConfig cfg = load_scenario_file(ov.config_path);
  if (!ov.algorithm.empty()) cfg.algorithm = algorithm_from_name(ov.algorithm);
  if (!ov.mapping.empty()) cfg.mapping = mapping_from_name(ov.mapping);
  if (!ov.readout.empty()) {
    if (ov.readout == "exact") cfg.readout = ReadoutMode::ExactProbability;
    else if (ov.readout == "single_shot") cfg.readout = ReadoutMode::SingleShot;
    else throw ConfigError("unknown readout mode '" + ov.readout + "'");
  }
  if (ov.dt > 0.0 || ov.horizon > 0.0) {
    const double dt = ov.dt > 0.0 ? ov.dt : cfg.grid.delta_tau;
    const double horizon = ov.horizon > 0.0 ? ov.horizon : cfg.grid.horizon;
    const long shots = cfg.grid.shots_per_point;
    const int substeps = cfg.grid.trotter_substeps;
    cfg.grid = SimulationGrid::from_horizon(horizon, dt);
    cfg.grid.shots_per_point = shots;
    cfg.grid.trotter_substeps = substeps;
  }
  if (ov.trajectories > 0) cfg.trajectories = ov.trajectories;
  if (ov.shots > 0) cfg.grid.shots_per_point = ov.shots;
  if (ov.substeps > 0) cfg.grid.trotter_substeps = ov.substeps;
  if (ov.gamma >= 0.0) cfg.network = with_uniform_dephasing(cfg.network, ov.gamma);
  if (ov.seed_set) cfg.seed = ov.seed;
  if (!ov.out.empty()) cfg.out_dir = ov.out;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dephasing-assisted transport simulators: exact master-equation reference, "
               "classical-noise trajectories, and collision circuits"};
  app.require_subcommand(1);

  Overrides ov;
  bool record_bits = false;
  int halvings = 2;
  std::string bits_path;
  std::vector<int> sizes{4, 6, 8, 10, 12};
  std::string topology = "ring";
  std::string scaling_mapping = "physical";
  std::string scaling_algorithm = "collision";
  int scaling_substeps = 1;
  std::string scaling_out = "out";

  CLI::App* dynamics = app.add_subcommand(
      "dynamics", "target-site population vs time, with the master-equation overlay");
  add_common_options(dynamics, ov);

  CLI::App* sweep = app.add_subcommand(
      "sweep", "transport efficiency across a log-spaced dephasing-rate grid");
  add_common_options(sweep, ov);

  CLI::App* trajectories = app.add_subcommand(
      "trajectories", "per-trajectory swarm dump with ensemble mean and oracle overlay");
  add_common_options(trajectories, ov);
  trajectories->add_flag("--record-bits", record_bits,
                         "dump each collision run's reset outcomes (collision only)");

  CLI::App* replay = app.add_subcommand(
      "replay", "rerun recorded collision trajectories from their reset bits");
  add_common_options(replay, ov);
  replay->add_option("--bits", bits_path, "bits file from 'trajectories --record-bits'")
      ->required()
      ->check(CLI::ExistingFile);

  CLI::App* converge = app.add_subcommand(
      "converge", "time-step refinement report (delta_tau, delta_tau/2, ...)");
  add_common_options(converge, ov);
  converge->add_option("--halvings", halvings, "number of time-step halvings (default 2)")
      ->check(CLI::PositiveNumber);

  CLI::App* scaling = app.add_subcommand(
      "scaling", "qubit and per-block gate counts across network sizes");
  scaling->add_option("--sizes", sizes, "network sizes, e.g. 4,6,8")->delimiter(',');
  scaling->add_option("--topology", topology, "ring | path | complete");
  scaling->add_option("--mapping", scaling_mapping, "physical | algorithmic");
  scaling->add_option("--algorithm", scaling_algorithm,
                      "classical_noise | collision | collision_algorithmic");
  scaling->add_option("--substeps", scaling_substeps, "Trotter substeps per block");
  scaling->add_option("--out", scaling_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*scaling) {
      run_scaling(sizes, topology, enaqt::mapping_from_name(scaling_mapping),
                  enaqt::algorithm_from_name(scaling_algorithm), scaling_substeps, scaling_out);
      return 0;
    }
    const ScenarioConfig cfg = load_with_overrides(ov);
    if (*dynamics) run_dynamics(cfg, cfg.out_dir);
    else if (*sweep) run_sweep(cfg, cfg.out_dir);
    else if (*trajectories) run_trajectories(cfg, cfg.out_dir, record_bits);
    else if (*replay) run_replay(cfg, bits_path, cfg.out_dir);
    else if (*converge) run_converge(cfg, halvings, cfg.out_dir);
  } catch (const enaqt::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const enaqt::NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
