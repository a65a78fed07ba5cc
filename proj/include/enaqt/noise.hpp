#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "enaqt/grid.hpp"
#include "enaqt/linalg.hpp"
#include "enaqt/network.hpp"
#include "enaqt/parallel.hpp"
#include "enaqt/pauli.hpp"
#include "enaqt/random.hpp"
#include "enaqt/state.hpp"

namespace enaqt {

enum class NoiseKind { White, OrnsteinUhlenbeck };

// Diagonal site-energy fluctuation process. White noise of variance omega_j^2
// reproduces dephasing at rate gamma_j = omega_j^2; the Ornstein-Uhlenbeck
// variant adds a finite correlation time 1/Lambda.
struct NoiseConfig {
  NoiseKind kind = NoiseKind::White;
  std::vector<double> variances;          // omega_j^2; size 1 broadcasts to all sites
  double inverse_correlation_time = 0.0;  // Lambda (OU only)

  static NoiseConfig white(std::vector<double> variances) {
    NoiseConfig c;
    c.variances = std::move(variances);
    return c;
  }

  // White noise reproducing per-site dephasing rates: omega_j^2 = gamma_j.
  static NoiseConfig white_from_rates(const std::vector<double>& gammas) {
    return white(gammas);
  }

  static NoiseConfig ornstein_uhlenbeck(std::vector<double> variances, double lambda) {
    NoiseConfig c;
    c.kind = NoiseKind::OrnsteinUhlenbeck;
    c.variances = std::move(variances);
    c.inverse_correlation_time = lambda;
    return c;
  }

  double variance_for_site(int site_index0) const {
    if (variances.size() == 1) return variances[0];
    return variances[static_cast<std::size_t>(site_index0)];
  }

  void validate(int n_sites) const {
    if (variances.size() != 1 && variances.size() != static_cast<std::size_t>(n_sites)) {
      throw ConfigError("noise: variance list must have 1 or site-count entries");
    }
    for (double v : variances) {
      if (!(v >= 0.0)) throw ConfigError("noise: variances must be >= 0");
    }
    if (inverse_correlation_time < 0.0) throw ConfigError("noise: Lambda must be >= 0");
  }
};

// One step of white site-energy noise, site-major order.
inline std::vector<double> sample_white_noise(const NoiseConfig& config, RandomStream& rng,
                                              int n_sites) {
  config.validate(n_sites);
  std::vector<double> de(static_cast<std::size_t>(n_sites));
  for (int j = 0; j < n_sites; ++j) {
    de[static_cast<std::size_t>(j)] = rng.normal(std::sqrt(config.variance_for_site(j)));
  }
  return de;
}

// Stationary initial draw of the Ornstein-Uhlenbeck process (same marginal as
// one white-noise step).
inline std::vector<double> ou_init(const NoiseConfig& config, RandomStream& rng, int n_sites) {
  return sample_white_noise(config, rng, n_sites);
}

// Exact one-step Ornstein-Uhlenbeck update:
// de_s = de_{s-1} e^{-Lambda dt} + G sqrt(1 - e^{-2 Lambda dt}), G ~ N(0, omega^2).
inline std::vector<double> ou_step(const std::vector<double>& prev, const NoiseConfig& config,
                                   double delta_tau, RandomStream& rng) {
  const int n = static_cast<int>(prev.size());
  config.validate(n);
  if (delta_tau <= 0.0) throw ConfigError("ou_step: delta_tau must be positive");
  const double decay = std::exp(-config.inverse_correlation_time * delta_tau);
  const double fresh = std::sqrt(std::max(0.0, 1.0 - decay * decay));
  std::vector<double> out(prev.size());
  for (int j = 0; j < n; ++j) {
    out[static_cast<std::size_t>(j)] =
        prev[static_cast<std::size_t>(j)] * decay +
        rng.normal(std::sqrt(config.variance_for_site(j))) * fresh;
  }
  return out;
}

enum class PropagatorMode { Exact, Split };

// Diagonal embedding of per-site fluctuations into the mapping's full space.
inline RealVector embed_site_fluctuations(const std::vector<double>& de, Mapping mapping,
                                          int n_sites) {
  if (static_cast<int>(de.size()) != n_sites) {
    throw ConfigError("embed_site_fluctuations: size mismatch");
  }
  const Eigen::Index dim = mapping == Mapping::Physical
                               ? (Eigen::Index{1} << n_sites)
                               : (Eigen::Index{1} << algorithmic_qubits(n_sites));
  RealVector f = RealVector::Zero(dim);
  for (int j = 1; j <= n_sites; ++j) {
    const Eigen::Index idx = mapping == Mapping::Physical ? encode_physical(j, n_sites)
                                                          : encode_algorithmic(j, n_sites);
    f[idx] = de[static_cast<std::size_t>(j - 1)];
  }
  return f;
}

// One-step propagator with fluctuating diagonal F = diag(fluct):
//   Exact: exp(-i (H dt + F sqrt(dt)))
//   Split: exp(-i H dt) exp(-i F sqrt(dt))   (diagonal factor acts first)
// White noise carries the sqrt(dt) weight built in here; finite-amplitude
// processes (Ornstein-Uhlenbeck) pre-scale fluct by sqrt(dt) so their total
// weight is dt.
inline ComplexMatrix step_propagator(const ComplexMatrix& h, const RealVector& fluct,
                                     double delta_tau, PropagatorMode mode) {
  if (h.rows() != h.cols() || h.rows() != fluct.size()) {
    throw ConfigError("step_propagator: dimension mismatch");
  }
  if (delta_tau <= 0.0) throw ConfigError("step_propagator: delta_tau must be positive");
  const double w = std::sqrt(delta_tau);
  if (mode == PropagatorMode::Exact) {
    ComplexMatrix a = h * delta_tau;
    for (Eigen::Index i = 0; i < fluct.size(); ++i) a(i, i) += fluct[i] * w;
    return hermitian_expm(a, 1.0);
  }
  ComplexMatrix u = hermitian_expm(h, delta_tau);
  for (Eigen::Index i = 0; i < fluct.size(); ++i) {
    u.col(i) *= std::polar(1.0, -fluct[i] * w);
  }
  return u;
}

enum class ReadoutMode { ExactProbability, SingleShot };

// One simulated run: per-step estimator pi(s) of the target population
// (exact probability or a Bernoulli shot average), plus optional per-site
// population series.
struct TrajectoryRecord {
  long id = 0;
  std::uint64_t stream_id = 0;
  NoiseKind noise_kind = NoiseKind::White;
  std::vector<double> estimator;
  std::vector<RealVector> populations;  // filled only when requested
};

// Precomputed context for repeated noise trajectories on one scenario.
// Immutable after construction; safe to share across threads.
struct NoiseTrajectoryEngine {
  ExcitonNetwork network;
  Mapping mapping = Mapping::Algorithmic;
  NoiseConfig noise;
  SimulationGrid grid;
  int source_site = 1;
  int target_site = 1;
  PropagatorMode propagator_mode = PropagatorMode::Exact;

  int n_qubits = 0;
  Eigen::Index dim = 0;
  ComplexMatrix hamiltonian;
  ComplexMatrix free_propagator;  // exp(-iH dt), Split mode only
  Eigen::Index source_index = 0;
  std::vector<Eigen::Index> site_indices;  // diagonal slot per site
  double fluct_prescale = 1.0;             // sqrt(dt) for OU, see step_propagator

  NoiseTrajectoryEngine(const ExcitonNetwork& net, Mapping map, const NoiseConfig& noise_config,
                        const SimulationGrid& g, int source, int target,
                        PropagatorMode mode = PropagatorMode::Exact)
      : network(net), mapping(map), noise(noise_config), grid(g), source_site(source),
        target_site(target), propagator_mode(mode) {
    net.validate();
    grid.validate();
    const int n = net.site_count();
    noise.validate(n);
    if (source < 1 || source > n || target < 1 || target > n) {
      throw ConfigError("trajectory: source/target site out of range");
    }
    if (mapping == Mapping::Physical) {
      n_qubits = n;
      dim = Eigen::Index{1} << n;
      hamiltonian = assemble_pauli_terms(qubit_hamiltonian(net), n);
    } else {
      n_qubits = algorithmic_qubits(n);
      dim = Eigen::Index{1} << n_qubits;
      hamiltonian = ComplexMatrix::Zero(dim, dim);
      hamiltonian.topLeftCorner(n, n) = site_hamiltonian(net);
    }
    for (int j = 1; j <= n; ++j) {
      site_indices.push_back(mapping == Mapping::Physical ? encode_physical(j, n)
                                                          : encode_algorithmic(j, n));
    }
    source_index = site_indices[static_cast<std::size_t>(source - 1)];
    if (noise.kind == NoiseKind::OrnsteinUhlenbeck) {
      fluct_prescale = std::sqrt(grid.delta_tau);
    }
    if (propagator_mode == PropagatorMode::Split) {
      free_propagator = hermitian_expm(hamiltonian, grid.delta_tau);
    }
  }

  double target_probability(const ComplexVector& psi) const {
    if (mapping == Mapping::Algorithmic) {
      return std::norm(psi[site_indices[static_cast<std::size_t>(target_site - 1)]]);
    }
    const Eigen::Index mask = Eigen::Index{1} << (n_qubits - target_site);
    double p = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) {
      if (i & mask) p += std::norm(psi[i]);
    }
    return p;
  }

  RealVector site_populations(const ComplexVector& psi) const {
    const int n = network.site_count();
    RealVector p(n);
    if (mapping == Mapping::Algorithmic) {
      for (int j = 0; j < n; ++j) p[j] = std::norm(psi[site_indices[static_cast<std::size_t>(j)]]);
      return p;
    }
    for (int j = 1; j <= n; ++j) {
      const Eigen::Index mask = Eigen::Index{1} << (n_qubits - j);
      double acc = 0.0;
      for (Eigen::Index i = 0; i < dim; ++i) {
        if (i & mask) acc += std::norm(psi[i]);
      }
      p[j - 1] = acc;
    }
    return p;
  }

  TrajectoryRecord run(RandomStream rng, ReadoutMode readout, bool keep_populations = false) const {
    const int n = network.site_count();
    TrajectoryRecord rec;
    rec.stream_id = rng.id();
    rec.noise_kind = noise.kind;
    rec.estimator.reserve(static_cast<std::size_t>(grid.steps + 1));
    if (keep_populations) rec.populations.reserve(static_cast<std::size_t>(grid.steps + 1));

    ComplexVector psi = ComplexVector::Zero(dim);
    psi[source_index] = 1.0;
    RealVector fluct(dim);

    auto record_sample = [&]() {
      const double p = target_probability(psi);
      double pi = p;
      if (readout == ReadoutMode::SingleShot) {
        long ones = 0;
        for (long k = 0; k < grid.shots_per_point; ++k) ones += rng.bernoulli(p) ? 1 : 0;
        pi = static_cast<double>(ones) / static_cast<double>(grid.shots_per_point);
      }
      rec.estimator.push_back(pi);
      if (keep_populations) rec.populations.push_back(site_populations(psi));
    };

    record_sample();
    std::vector<double> de;
    if (noise.kind == NoiseKind::OrnsteinUhlenbeck) de = ou_init(noise, rng, n);
    for (long s = 1; s <= grid.steps; ++s) {
      if (noise.kind == NoiseKind::White) {
        de = sample_white_noise(noise, rng, n);
      } else {
        de = ou_step(de, noise, grid.delta_tau, rng);
      }
      fluct.setZero();
      for (int j = 0; j < n; ++j) {
        fluct[site_indices[static_cast<std::size_t>(j)]] =
            de[static_cast<std::size_t>(j)] * fluct_prescale;
      }
      if (propagator_mode == PropagatorMode::Split) {
        // Same algebra as step_propagator(Split) without rebuilding exp(-iH dt).
        const double w = std::sqrt(grid.delta_tau);
        for (Eigen::Index i = 0; i < dim; ++i) {
          psi[i] *= std::polar(1.0, -fluct[i] * w);
        }
        psi = (free_propagator * psi).eval();
      } else {
        const ComplexMatrix u = step_propagator(hamiltonian, fluct, grid.delta_tau,
                                                PropagatorMode::Exact);
        psi = (u * psi).eval();
      }
      record_sample();
    }
    if (std::abs(psi.norm() - 1.0) > 1e-9) {
      throw NumericError("trajectory: statevector norm drift beyond tolerance");
    }
    return rec;
  }
};

// Convenience single-trajectory entry point.
inline TrajectoryRecord run_noise_trajectory(const ExcitonNetwork& net, Mapping mapping,
                                             const NoiseConfig& noise, const SimulationGrid& grid,
                                             int source, int target, RandomStream rng,
                                             ReadoutMode readout,
                                             bool keep_populations = false,
                                             PropagatorMode mode = PropagatorMode::Exact) {
  const NoiseTrajectoryEngine engine(net, mapping, noise, grid, source, target, mode);
  return engine.run(std::move(rng), readout, keep_populations);
}

// Pointwise ensemble mean with standard-error band, plus the transport
// efficiency estimate and its standard error.
struct AveragedSeries {
  double delta_tau = 0.0;
  int source_site = 0;
  int target_site = 0;
  long count = 0;
  std::vector<double> times;
  std::vector<double> mean;
  std::vector<double> std_error;
  double efficiency = 0.0;
  double efficiency_stderr = 0.0;
};

namespace detail {

// Deterministic index-ordered reduction: moments accumulate in trajectory
// order regardless of how many threads produced the records.
struct EnsembleAccumulator {
  double delta_tau = 0.0;
  long count = 0;
  std::vector<double> sum, sum_sq;
  double eta_sum = 0.0, eta_sum_sq = 0.0;

  explicit EnsembleAccumulator(double dt) : delta_tau(dt) {}

  void add(const TrajectoryRecord& rec) {
    if (sum.empty()) {
      sum.assign(rec.estimator.size(), 0.0);
      sum_sq.assign(rec.estimator.size(), 0.0);
    }
    if (rec.estimator.size() != sum.size()) {
      throw ConfigError("ensemble: mismatched estimator lengths");
    }
    double eta = 0.0;
    for (std::size_t s = 0; s < rec.estimator.size(); ++s) {
      const double v = rec.estimator[s];
      sum[s] += v;
      sum_sq[s] += v * v;
      eta += v;
    }
    eta *= delta_tau;
    eta_sum += eta;
    eta_sum_sq += eta * eta;
    ++count;
  }

  AveragedSeries finish(int source, int target) const {
    if (count == 0) throw ConfigError("ensemble: no trajectories");
    AveragedSeries a;
    a.delta_tau = delta_tau;
    a.source_site = source;
    a.target_site = target;
    a.count = count;
    const double n = static_cast<double>(count);
    a.times.resize(sum.size());
    a.mean.resize(sum.size());
    a.std_error.resize(sum.size());
    for (std::size_t s = 0; s < sum.size(); ++s) {
      a.times[s] = static_cast<double>(s) * delta_tau;
      a.mean[s] = sum[s] / n;
      double se = 0.0;
      if (count > 1) {
        const double var = std::max(0.0, (sum_sq[s] - n * a.mean[s] * a.mean[s]) / (n - 1.0));
        se = std::sqrt(var / n);
      }
      a.std_error[s] = se;
    }
    a.efficiency = eta_sum / n;
    if (count > 1) {
      const double var =
          std::max(0.0, (eta_sum_sq - n * a.efficiency * a.efficiency) / (n - 1.0));
      a.efficiency_stderr = std::sqrt(var / n);
    }
    return a;
  }
};

}  // namespace detail

// Mean/stderr reduction of already-materialized records.
inline AveragedSeries ensemble_average(const std::vector<TrajectoryRecord>& records,
                                       double delta_tau, int source, int target) {
  if (records.empty()) throw ConfigError("ensemble_average: empty record list");
  detail::EnsembleAccumulator acc(delta_tau);
  for (const auto& r : records) acc.add(r);
  return acc.finish(source, target);
}

// Runs `count` trajectories with per-trajectory streams derived from
// (master_seed, trajectory id) and reduces them in id order. Trajectories are
// simulated in fixed-size batches so memory stays flat at large counts.
inline AveragedSeries run_noise_ensemble(const NoiseTrajectoryEngine& engine, long count,
                                         std::uint64_t master_seed, ReadoutMode readout,
                                         long batch_size = 256) {
  if (count < 1) throw ConfigError("ensemble: trajectory count must be >= 1");
  detail::EnsembleAccumulator acc(engine.grid.delta_tau);
  std::vector<TrajectoryRecord> batch;
  for (long start = 0; start < count; start += batch_size) {
    const long m = std::min(batch_size, count - start);
    batch.assign(static_cast<std::size_t>(m), TrajectoryRecord{});
    parallel_for(m, [&](long i) {
      const long id = start + i + 1;  // 1-based trajectory ids
      RandomStream rng = RandomStream::derived(master_seed, static_cast<std::uint64_t>(id));
      batch[static_cast<std::size_t>(i)] = engine.run(std::move(rng), readout);
      batch[static_cast<std::size_t>(i)].id = id;
    });
    for (const auto& r : batch) acc.add(r);
  }
  return acc.finish(engine.source_site, engine.target_site);
}

// Materialized variant for trajectory dumps (modest counts).
inline std::vector<TrajectoryRecord> run_noise_records(const NoiseTrajectoryEngine& engine,
                                                       long count, std::uint64_t master_seed,
                                                       ReadoutMode readout,
                                                       bool keep_populations = false) {
  if (count < 1) throw ConfigError("ensemble: trajectory count must be >= 1");
  std::vector<TrajectoryRecord> records(static_cast<std::size_t>(count));
  parallel_for(count, [&](long i) {
    const long id = i + 1;
    RandomStream rng = RandomStream::derived(master_seed, static_cast<std::uint64_t>(id));
    records[static_cast<std::size_t>(i)] = engine.run(std::move(rng), readout, keep_populations);
    records[static_cast<std::size_t>(i)].id = id;
  });
  return records;
}

}  // namespace enaqt
