#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "enaqt/collision.hpp"
#include "enaqt/collision_algorithmic.hpp"
#include "enaqt/collision_circuit.hpp"
#include "enaqt/config.hpp"
#include "enaqt/enaqt.hpp"
#include "enaqt/lindblad.hpp"
#include "enaqt/noise.hpp"

namespace enaqt {

namespace detail {

// Streaming FNV-1a, so large CSV files are checksummed while being written.
struct StreamingFnv64 {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  void update(std::string_view chunk) {
    for (unsigned char c : chunk) {
      h ^= c;
      h *= 0x100000001B3ULL;
    }
  }
};

inline std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace detail

struct OutputRecord {
  std::string name;
  std::uint64_t checksum = 0;
  long rows = 0;  // payload rows, header excluded
};

// Serializes one output file: rows are appended as text chunks, the checksum
// and row count accumulate on the fly.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& dir, const std::string& name, const std::string& header)
      : name_(name), out_(dir / name, std::ios::binary) {
    if (!out_) throw ConfigError("cannot create output file '" + (dir / name).string() + "'");
    write_chunk(header + "\n");
  }

  void row(const std::string& line) {
    write_chunk(line + "\n");
    ++rows_;
  }

  OutputRecord close() {
    out_.flush();
    if (!out_) throw ConfigError("failed writing output file '" + name_ + "'");
    out_.close();
    return {name_, fnv_.h, rows_};
  }

 private:
  void write_chunk(const std::string& chunk) {
    out_ << chunk;
    fnv_.update(chunk);
  }

  std::string name_;
  std::ofstream out_;
  detail::StreamingFnv64 fnv_;
  long rows_ = 0;
};

inline std::string csv_num(double x) { return detail::format_double(x); }

// Sidecar manifest: config echo, version, timing, checksums, and any
// run-specific summary values. Everything except the timestamp and wall
// clock is deterministic for a given config + seed.
inline void write_manifest(const std::filesystem::path& dir, const std::string& command,
                           const ScenarioConfig& cfg, double wall_seconds,
                           const std::vector<OutputRecord>& outputs,
                           const nlohmann::json& extra = nlohmann::json::object()) {
  nlohmann::json m;
  m["version"] = ENAQT_VERSION;
  m["command"] = command;
  m["config"] = serialize_scenario(cfg);
  m["seed"] = cfg.seed;
  m["scenario_hash"] = detail::hex64(scenario_hash(cfg));
  m["ensemble_master"] = detail::hex64(ensemble_master(cfg));
  m["wall_clock_seconds"] = wall_seconds;
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  m["timestamp"] = stamp;
  nlohmann::json outs = nlohmann::json::object();
  for (const auto& o : outputs) {
    outs[o.name] = {{"fnv1a64", detail::hex64(o.checksum)}, {"rows", o.rows}};
  }
  m["outputs"] = outs;
  if (!extra.empty()) m["summary"] = extra;
  std::ofstream f(dir / "manifest.json", std::ios::binary);
  if (!f) throw ConfigError("cannot create manifest in '" + dir.string() + "'");
  f << m.dump(2) << "\n";
}

class WallClock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// ---------------------------------------------------------------------------
// dynamics

inline PopulationSeries oracle_series(const ExcitonNetwork& net, const SimulationGrid& grid,
                                      int source, int target) {
  IntegrationResult r = integrate_master_equation(site_dephasing_problem(net, source), grid);
  r.series.source_site = source;
  r.series.target_site = target;
  r.series.target_index = target - 1;
  return r.series;
}

struct DynamicsResult {
  bool stochastic = false;
  AveragedSeries series;          // mean estimator (the oracle itself for lindblad)
  std::vector<double> oracle;     // oracle target population per sample
  double eta = 0.0;
  double eta_stderr = 0.0;
  double eta_oracle = 0.0;
};

inline DynamicsResult compute_dynamics(const ScenarioConfig& cfg) {
  cfg.validate();
  DynamicsResult out;
  const PopulationSeries oracle = oracle_series(cfg.network, cfg.grid, cfg.source, cfg.target);
  out.oracle = oracle.target_series();
  out.eta_oracle = transport_efficiency(oracle);

  const std::uint64_t master = ensemble_master(cfg);
  switch (cfg.algorithm) {
    case Algorithm::Lindblad: {
      out.stochastic = false;
      out.series.delta_tau = cfg.grid.delta_tau;
      out.series.source_site = cfg.source;
      out.series.target_site = cfg.target;
      out.series.count = 1;
      out.series.times = oracle.times;
      out.series.mean = out.oracle;
      out.series.std_error.assign(out.oracle.size(), 0.0);
      out.series.efficiency = out.eta_oracle;
      break;
    }
    case Algorithm::ClassicalNoise: {
      out.stochastic = true;
      const NoiseTrajectoryEngine engine(cfg.network, cfg.mapping, cfg.noise_config(), cfg.grid,
                                         cfg.source, cfg.target, cfg.propagator);
      out.series = run_noise_ensemble(engine, cfg.trajectories, master, cfg.readout);
      break;
    }
    case Algorithm::Collision: {
      out.stochastic = true;
      const CollisionConfig ccfg = CollisionConfig::from_network_rates(
          cfg.network, cfg.grid.delta_tau, cfg.grid.trotter_substeps, Mapping::Physical);
      const CollisionCircuitEngine engine(cfg.network, ccfg, cfg.grid, cfg.source, cfg.target);
      out.series = run_collision_ensemble(engine, cfg.trajectories, master, cfg.readout);
      break;
    }
    case Algorithm::CollisionAlgorithmic: {
      out.stochastic = true;
      const CollisionConfig ccfg = CollisionConfig::from_network_rates(
          cfg.network, cfg.grid.delta_tau, cfg.grid.trotter_substeps, Mapping::Algorithmic);
      const AlgorithmicCollisionEngine engine(cfg.network, ccfg, cfg.grid, cfg.source,
                                              cfg.target);
      out.series = run_algorithmic_collision_ensemble(engine, cfg.trajectories, master,
                                                      cfg.readout);
      break;
    }
  }
  out.eta = out.series.efficiency;
  out.eta_stderr = out.series.efficiency_stderr;
  return out;
}

inline void run_dynamics(const ScenarioConfig& cfg, const std::string& out_dir) {
  const WallClock clock;
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  const DynamicsResult r = compute_dynamics(cfg);

  CsvWriter csv(dir, "dynamics.csv", "s,t,p_target,stderr,p_oracle");
  for (std::size_t s = 0; s < r.series.mean.size(); ++s) {
    const std::string err = r.stochastic ? csv_num(r.series.std_error[s]) : "";
    csv.row(std::to_string(s) + "," + csv_num(r.series.times[s]) + "," +
            csv_num(r.series.mean[s]) + "," + err + "," + csv_num(r.oracle[s]));
  }
  nlohmann::json extra;
  extra["eta"] = r.eta;
  extra["eta_oracle"] = r.eta_oracle;
  if (r.stochastic) extra["eta_stderr"] = r.eta_stderr;
  write_manifest(dir, "dynamics", cfg, clock.seconds(), {csv.close()}, extra);
}

// ---------------------------------------------------------------------------
// sweep

// Grid for one sweep point: the configured step, shrunk so that
// gamma * delta_tau stays below the cap (keeping the per-step noise/collision
// strength perturbative at strong dephasing) while hitting the horizon
// exactly.
inline SimulationGrid sweep_point_grid(const SimulationGrid& base, double gamma,
                                       double gamma_dt_cap) {
  if (gamma_dt_cap <= 0.0 || gamma * base.delta_tau <= gamma_dt_cap) return base;
  const double horizon = base.horizon;
  const long steps = static_cast<long>(std::ceil(horizon / (gamma_dt_cap / gamma) - 1e-12));
  SimulationGrid g = base;
  g.steps = steps;
  g.delta_tau = horizon / static_cast<double>(steps);
  g.horizon = horizon;
  return g;
}

inline std::vector<EfficiencyPoint> compute_sweep(const ScenarioConfig& cfg) {
  cfg.validate();
  if (!cfg.sweep.enabled) throw ConfigError("sweep: config has no sweep specification");
  std::vector<EfficiencyPoint> points;
  for (double gamma : cfg.sweep.grid_values()) {
    ScenarioConfig pt = cfg;
    pt.sweep.enabled = false;
    pt.network = with_uniform_dephasing(cfg.network, gamma);
    pt.grid = sweep_point_grid(cfg.grid, gamma, cfg.sweep.gamma_dt_cap);
    const DynamicsResult r = compute_dynamics(pt);
    EfficiencyPoint p;
    p.gamma = gamma;
    p.delta_tau = pt.grid.delta_tau;
    p.eta = r.eta;
    p.eta_stderr = r.eta_stderr;
    p.eta_oracle = r.eta_oracle;
    points.push_back(p);
  }
  return points;
}

inline void run_sweep(const ScenarioConfig& cfg, const std::string& out_dir) {
  const WallClock clock;
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  const std::vector<EfficiencyPoint> points = compute_sweep(cfg);

  CsvWriter csv(dir, "sweep.csv", "gamma,delta_tau,eta,eta_stderr,eta_oracle");
  const bool stochastic = cfg.algorithm != Algorithm::Lindblad;
  for (const auto& p : points) {
    const std::string err = stochastic ? csv_num(p.eta_stderr) : "";
    csv.row(csv_num(p.gamma) + "," + csv_num(p.delta_tau) + "," + csv_num(p.eta) + "," + err +
            "," + csv_num(p.eta_oracle));
  }
  write_manifest(dir, "sweep", cfg, clock.seconds(), {csv.close()});
}

// ---------------------------------------------------------------------------
// trajectories

// Per-trajectory series for swarm plots (always the exact per-step
// probability, so collision dumps can be replayed bit-exactly), the ensemble
// mean with its oracle overlay, and optional reset-bit records.
inline void run_trajectories(const ScenarioConfig& cfg, const std::string& out_dir,
                             bool record_bits) {
  const WallClock clock;
  cfg.validate();
  if (cfg.algorithm == Algorithm::Lindblad) {
    throw ConfigError("trajectories: a stochastic algorithm is required");
  }
  if (record_bits && cfg.algorithm != Algorithm::Collision) {
    throw ConfigError("trajectories: bit recording is collision-only");
  }
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  const std::uint64_t master = ensemble_master(cfg);
  const PopulationSeries oracle = oracle_series(cfg.network, cfg.grid, cfg.source, cfg.target);
  const std::vector<double> oracle_target = oracle.target_series();

  CsvWriter traj_csv(dir, "trajectories.csv", "xi,s,t,p");
  std::unique_ptr<CsvWriter> bits_csv;
  if (record_bits) bits_csv = std::make_unique<CsvWriter>(dir, "bits.txt", "xi n_bits hex");
  detail::EnsembleAccumulator acc(cfg.grid.delta_tau);

  auto emit = [&](long id, const std::vector<double>& estimator, const CollisionBitString* bits) {
    TrajectoryRecord rec;
    rec.id = id;
    rec.estimator = estimator;
    acc.add(rec);
    for (std::size_t s = 0; s < estimator.size(); ++s) {
      traj_csv.row(std::to_string(id) + "," + std::to_string(s) + "," +
                   csv_num(static_cast<double>(s) * cfg.grid.delta_tau) + "," +
                   csv_num(estimator[s]));
    }
    if (bits_csv && bits) {
      bits_csv->row(std::to_string(id) + " " + std::to_string(bits->bits.size()) + " " +
                    bits->to_hex());
    }
  };

  const long batch_size = 64;
  if (cfg.algorithm == Algorithm::ClassicalNoise) {
    const NoiseTrajectoryEngine engine(cfg.network, cfg.mapping, cfg.noise_config(), cfg.grid,
                                       cfg.source, cfg.target, cfg.propagator);
    std::vector<TrajectoryRecord> batch;
    for (long start = 0; start < cfg.trajectories; start += batch_size) {
      const long m = std::min(batch_size, cfg.trajectories - start);
      batch.assign(static_cast<std::size_t>(m), TrajectoryRecord{});
      parallel_for(m, [&](long i) {
        RandomStream rng =
            RandomStream::derived(master, static_cast<std::uint64_t>(start + i + 1));
        batch[static_cast<std::size_t>(i)] =
            engine.run(std::move(rng), ReadoutMode::ExactProbability);
      });
      for (long i = 0; i < m; ++i) {
        emit(start + i + 1, batch[static_cast<std::size_t>(i)].estimator, nullptr);
      }
    }
  } else if (cfg.algorithm == Algorithm::Collision) {
    const CollisionConfig ccfg = CollisionConfig::from_network_rates(
        cfg.network, cfg.grid.delta_tau, cfg.grid.trotter_substeps, Mapping::Physical);
    const CollisionCircuitEngine engine(cfg.network, ccfg, cfg.grid, cfg.source, cfg.target);
    std::vector<CollisionRunResult> batch;
    for (long start = 0; start < cfg.trajectories; start += batch_size) {
      const long m = std::min(batch_size, cfg.trajectories - start);
      batch.assign(static_cast<std::size_t>(m), CollisionRunResult{});
      parallel_for(m, [&](long i) {
        RandomStream rng =
            RandomStream::derived(master, static_cast<std::uint64_t>(start + i + 1));
        batch[static_cast<std::size_t>(i)] =
            engine.run(std::move(rng), ReadoutMode::ExactProbability, record_bits);
      });
      for (long i = 0; i < m; ++i) {
        const auto& r = batch[static_cast<std::size_t>(i)];
        emit(start + i + 1, r.record.estimator, &r.bits);
      }
    }
  } else {
    const CollisionConfig ccfg = CollisionConfig::from_network_rates(
        cfg.network, cfg.grid.delta_tau, cfg.grid.trotter_substeps, Mapping::Algorithmic);
    const AlgorithmicCollisionEngine engine(cfg.network, ccfg, cfg.grid, cfg.source, cfg.target);
    std::vector<TrajectoryRecord> batch;
    for (long start = 0; start < cfg.trajectories; start += batch_size) {
      const long m = std::min(batch_size, cfg.trajectories - start);
      batch.assign(static_cast<std::size_t>(m), TrajectoryRecord{});
      parallel_for(m, [&](long i) {
        RandomStream rng =
            RandomStream::derived(master, static_cast<std::uint64_t>(start + i + 1));
        batch[static_cast<std::size_t>(i)] =
            engine.run(std::move(rng), ReadoutMode::ExactProbability);
      });
      for (long i = 0; i < m; ++i) {
        emit(start + i + 1, batch[static_cast<std::size_t>(i)].estimator, nullptr);
      }
    }
  }

  const AveragedSeries mean = acc.finish(cfg.source, cfg.target);
  CsvWriter mean_csv(dir, "mean.csv", "s,t,p_mean,stderr,p_oracle");
  for (std::size_t s = 0; s < mean.mean.size(); ++s) {
    mean_csv.row(std::to_string(s) + "," + csv_num(mean.times[s]) + "," + csv_num(mean.mean[s]) +
                 "," + csv_num(mean.std_error[s]) + "," + csv_num(oracle_target[s]));
  }
  std::vector<OutputRecord> outputs{traj_csv.close(), mean_csv.close()};
  if (bits_csv) outputs.push_back(bits_csv->close());
  nlohmann::json extra;
  extra["eta"] = mean.efficiency;
  extra["eta_stderr"] = mean.efficiency_stderr;
  write_manifest(dir, "trajectories", cfg, clock.seconds(), outputs, extra);
}

// ---------------------------------------------------------------------------
// replay

// Re-derives trajectories from recorded reset bits. Each line of the bits
// file is rerun through the collision circuit with the resets forced to the
// recorded outcomes; the emitted rows are byte-identical to the original
// trajectories.csv rows for those ids.
inline void run_replay(const ScenarioConfig& cfg, const std::string& bits_path,
                       const std::string& out_dir) {
  const WallClock clock;
  cfg.validate();
  if (cfg.algorithm != Algorithm::Collision) {
    throw ConfigError("replay: algorithm 'collision' is required");
  }
  std::ifstream in(bits_path);
  if (!in) throw ConfigError("replay: cannot open bits file '" + bits_path + "'");
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);

  const CollisionConfig ccfg = CollisionConfig::from_network_rates(
      cfg.network, cfg.grid.delta_tau, cfg.grid.trotter_substeps, Mapping::Physical);
  const CollisionCircuitEngine engine(cfg.network, ccfg, cfg.grid, cfg.source, cfg.target);

  CsvWriter csv(dir, "replayed.csv", "xi,s,t,p");
  std::string line;
  bool header_skipped = false;
  long count = 0;
  while (std::getline(in, line)) {
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    if (!header_skipped) {
      header_skipped = true;
      if (t == "xi n_bits hex") continue;  // tolerate files without the header
    }
    std::istringstream fields(t);
    long id = 0, n_bits = 0;
    std::string hex;
    if (!(fields >> id >> n_bits >> hex)) {
      throw ConfigError("replay: malformed bits line '" + t + "'");
    }
    const CollisionBitString bits =
        CollisionBitString::from_hex(hex, static_cast<std::size_t>(n_bits));
    const CollisionRunResult r =
        engine.run(RandomStream(0), ReadoutMode::ExactProbability, false, 0, &bits.bits);
    for (std::size_t s = 0; s < r.record.estimator.size(); ++s) {
      csv.row(std::to_string(id) + "," + std::to_string(s) + "," +
              csv_num(static_cast<double>(s) * cfg.grid.delta_tau) + "," +
              csv_num(r.record.estimator[s]));
    }
    ++count;
  }
  nlohmann::json extra;
  extra["replayed_trajectories"] = count;
  write_manifest(dir, "replay", cfg, clock.seconds(), {csv.close()}, extra);
}

// ---------------------------------------------------------------------------
// convergence

struct ConvergenceLevel {
  int level = 0;
  double delta_tau = 0.0;
  double eta = 0.0;
  double max_abs_change = 0.0;  // vs the previous level, at that level's sample times
};

struct ConvergenceReport {
  std::vector<ConvergenceLevel> levels;
  double fitted_order = 0.0;  // least-squares slope of log(change) vs log(delta_tau)
  bool order_defined = false;
};

namespace detail {

// Deterministic one-step superoperator of the binary-register collision
// algorithm, the coin average of the diagonal interaction phases.
inline ComplexMatrix algorithmic_step_superoperator(const ExcitonNetwork& net,
                                                    const CollisionConfig& cfg, double delta_tau) {
  const int n = net.site_count();
  const Eigen::Index d = Eigen::Index{1} << algorithmic_qubits(n);
  ComplexMatrix h = ComplexMatrix::Zero(d, d);
  h.topLeftCorner(n, n) = site_hamiltonian(net);
  const ComplexMatrix u = hermitian_expm(h, delta_tau);
  ComplexMatrix s = kron(u.conjugate(), u);
  for (int j = 1; j <= n; ++j) {
    const double theta = cfg.coupling_for_site(j - 1) * delta_tau;
    ComplexMatrix dplus = ComplexMatrix::Identity(d, d);
    ComplexMatrix dminus = ComplexMatrix::Identity(d, d);
    dplus(j - 1, j - 1) = std::polar(1.0, -theta);
    dminus(j - 1, j - 1) = std::polar(1.0, theta);
    const ComplexMatrix site_s =
        0.5 * (kron(dplus.conjugate(), dplus) + kron(dminus.conjugate(), dminus));
    s = site_s * s;
  }
  return s;
}

inline std::vector<double> convergence_target_series(const ScenarioConfig& cfg,
                                                     const SimulationGrid& grid,
                                                     std::uint64_t fixed_master) {
  switch (cfg.algorithm) {
    case Algorithm::Lindblad:
      return oracle_series(cfg.network, grid, cfg.source, cfg.target).target_series();
    case Algorithm::Collision: {
      const CollisionConfig ccfg = CollisionConfig::from_network_rates(
          cfg.network, grid.delta_tau, grid.trotter_substeps, Mapping::Physical);
      return iterate_collision_channel(cfg.network, ccfg, grid, cfg.source, cfg.target)
          .target_series();
    }
    case Algorithm::CollisionAlgorithmic: {
      const int n = cfg.network.site_count();
      const CollisionConfig ccfg = CollisionConfig::from_network_rates(
          cfg.network, grid.delta_tau, grid.trotter_substeps, Mapping::Algorithmic);
      const ComplexMatrix s = algorithmic_step_superoperator(cfg.network, ccfg, grid.delta_tau);
      const Eigen::Index d = Eigen::Index{1} << algorithmic_qubits(n);
      ComplexMatrix rho = ComplexMatrix::Zero(d, d);
      rho(cfg.source - 1, cfg.source - 1) = 1.0;
      Eigen::Map<ComplexVector> vec(rho.data(), d * d);
      std::vector<double> series{rho(cfg.target - 1, cfg.target - 1).real()};
      ComplexVector next(d * d);
      for (long step = 1; step <= grid.steps; ++step) {
        next.noalias() = s * vec;
        vec = next;
        series.push_back(rho(cfg.target - 1, cfg.target - 1).real());
      }
      return series;
    }
    case Algorithm::ClassicalNoise: {
      const NoiseTrajectoryEngine engine(cfg.network, cfg.mapping, cfg.noise_config(), grid,
                                         cfg.source, cfg.target, cfg.propagator);
      return run_noise_ensemble(engine, cfg.trajectories, fixed_master,
                                ReadoutMode::ExactProbability)
          .mean;
    }
  }
  throw ConfigError("convergence: unsupported algorithm");
}

}  // namespace detail

// Reruns the scenario at delta_tau, delta_tau/2, ..., comparing the target
// population series of consecutive levels at shared sample times. The
// classical-noise variant reuses one fixed trajectory seed set on every
// level, so the reported change is integration bias plus residual sampling
// noise rather than fresh-ensemble scatter.
inline ConvergenceReport compute_convergence(const ScenarioConfig& cfg, int halvings) {
  cfg.validate();
  if (halvings < 1) throw ConfigError("convergence: halvings must be >= 1");
  const std::uint64_t fixed_master = ensemble_master(cfg);
  ConvergenceReport report;
  std::vector<std::vector<double>> series;
  for (int level = 0; level <= halvings; ++level) {
    SimulationGrid g = cfg.grid;
    g.steps = cfg.grid.steps << level;
    g.delta_tau = cfg.grid.delta_tau / static_cast<double>(1L << level);
    series.push_back(detail::convergence_target_series(cfg, g, fixed_master));
    ConvergenceLevel lv;
    lv.level = level;
    lv.delta_tau = g.delta_tau;
    double eta = 0.0;
    for (double p : series.back()) eta += p;
    lv.eta = eta * g.delta_tau;
    if (level > 0) {
      // Compare at the coarser level's sample times.
      const auto& coarse = series[static_cast<std::size_t>(level - 1)];
      const auto& fine = series.back();
      double worst = 0.0;
      for (std::size_t s = 0; s < coarse.size(); ++s) {
        worst = std::max(worst, std::abs(fine[2 * s] - coarse[s]));
      }
      lv.max_abs_change = worst;
    }
    report.levels.push_back(lv);
  }
  if (halvings >= 2) {
    // Least squares of log(change) on log(delta_tau) over the fine levels.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int n = 0;
    for (std::size_t l = 1; l < report.levels.size(); ++l) {
      const double c = report.levels[l].max_abs_change;
      if (c <= 0.0) continue;
      const double x = std::log(report.levels[l].delta_tau);
      const double y = std::log(c);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++n;
    }
    if (n >= 2) {
      report.fitted_order = (static_cast<double>(n) * sxy - sx * sy) /
                            (static_cast<double>(n) * sxx - sx * sx);
      report.order_defined = true;
    }
  }
  return report;
}

inline void run_converge(const ScenarioConfig& cfg, int halvings, const std::string& out_dir) {
  const WallClock clock;
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  const ConvergenceReport report = compute_convergence(cfg, halvings);

  CsvWriter csv(dir, "convergence.csv", "level,delta_tau,eta,max_abs_change");
  for (const auto& lv : report.levels) {
    csv.row(std::to_string(lv.level) + "," + csv_num(lv.delta_tau) + "," + csv_num(lv.eta) + "," +
            (lv.level == 0 ? std::string() : csv_num(lv.max_abs_change)));
  }
  nlohmann::json extra;
  if (report.order_defined) extra["fitted_order"] = report.fitted_order;
  write_manifest(dir, "converge", cfg, clock.seconds(), {csv.close()}, extra);
}

// ---------------------------------------------------------------------------
// scaling

struct ScalingRow {
  int n_sites = 0;
  int qubits = 0;
  long gates_per_block = 0;
  bool estimate = false;  // closed-form bound rather than a counted sequence
};

// Register widths and per-evolution-block gate counts across network sizes.
// Physical-mapping collision counts enumerate the actual gate sequence;
// everything else is a closed-form count (dense-unitary 4^q / diagonal 2^q
// bounds for the binary register), marked as an estimate.
inline std::vector<ScalingRow> compute_scaling(const std::vector<int>& sizes,
                                               const std::string& topology, Mapping mapping,
                                               Algorithm algorithm, int substeps = 1) {
  if (algorithm == Algorithm::Lindblad) {
    throw ConfigError("scaling: lindblad reference has no gate decomposition");
  }
  if (substeps < 1) throw ConfigError("scaling: substeps must be >= 1");
  std::vector<ScalingRow> rows;
  for (int n : sizes) {
    if (n < 2) throw ConfigError("scaling: network sizes must be >= 2");
    const Graph g = topology == "ring"       ? cycle_graph(n)
                    : topology == "path"     ? path_graph(n)
                    : topology == "complete" ? complete_graph(n)
                    : throw ConfigError("scaling: unknown topology '" + topology + "'");
    const ExcitonNetwork net = network_from_graph(g, 0.1);
    const long edges = static_cast<long>(net.edges.size());
    const int q = algorithmic_qubits(n);
    ScalingRow row;
    row.n_sites = n;
    if (mapping == Mapping::Physical) {
      if (algorithm == Algorithm::Collision) {
        const CollisionConfig ccfg =
            CollisionConfig::from_network_rates(net, 0.01, substeps, Mapping::Physical);
        row.qubits = n + 1;
        row.gates_per_block = static_cast<long>(trotter_gate_sequence(net, ccfg).size());
        row.estimate = false;
      } else {
        // Trotterized free block plus one diagonal noise phase per site.
        row.qubits = n;
        row.gates_per_block = static_cast<long>(substeps) * (n + 2 * edges) + n;
        row.estimate = true;
      }
    } else {
      if (algorithm == Algorithm::Collision || algorithm == Algorithm::CollisionAlgorithmic) {
        row.qubits = q + 1;
        row.gates_per_block = (1L << (2 * q)) + static_cast<long>(n) * (1L << q);
      } else {
        row.qubits = q;
        row.gates_per_block = (1L << (2 * q)) + (1L << q);
      }
      row.estimate = true;
    }
    rows.push_back(row);
  }
  return rows;
}

inline void run_scaling(const std::vector<int>& sizes, const std::string& topology,
                        Mapping mapping, Algorithm algorithm, int substeps,
                        const std::string& out_dir) {
  const WallClock clock;
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  const std::vector<ScalingRow> rows = compute_scaling(sizes, topology, mapping, algorithm,
                                                       substeps);
  CsvWriter csv(dir, "scaling.csv", "N,qubits,gates_per_block,kind");
  for (const auto& r : rows) {
    csv.row(std::to_string(r.n_sites) + "," + std::to_string(r.qubits) + "," +
            std::to_string(r.gates_per_block) + "," + (r.estimate ? "estimate" : "measured"));
  }
  nlohmann::json m;
  m["topology"] = topology;
  m["mapping"] = mapping_name(mapping);
  m["algorithm"] = algorithm_name(algorithm);
  m["substeps"] = substeps;

  nlohmann::json manifest;
  manifest["version"] = ENAQT_VERSION;
  manifest["command"] = "scaling";
  manifest["parameters"] = m;
  const OutputRecord rec = csv.close();
  manifest["outputs"] = {{rec.name, {{"fnv1a64", detail::hex64(rec.checksum)},
                                     {"rows", rec.rows}}}};
  manifest["wall_clock_seconds"] = clock.seconds();
  std::ofstream f(dir / "manifest.json", std::ios::binary);
  if (!f) throw ConfigError("cannot create manifest in '" + out_dir + "'");
  f << manifest.dump(2) << "\n";
}

}  // namespace enaqt
