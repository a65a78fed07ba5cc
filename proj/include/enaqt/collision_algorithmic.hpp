#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "enaqt/collision.hpp"
#include "enaqt/grid.hpp"
#include "enaqt/linalg.hpp"
#include "enaqt/network.hpp"
#include "enaqt/noise.hpp"
#include "enaqt/parallel.hpp"
#include "enaqt/random.hpp"
#include "enaqt/state.hpp"

namespace enaqt {

// Binary-register collision step on an explicit quantum state. The register
// holds ceil(log2 N) system qubits (site j at index j-1) plus one coin
// ancilla as the last qubit. One step: the free propagator on the system
// qubits, then for every site a fresh coin (reset, then X with probability
// one half, realizing the maximally mixed ancilla) followed by the diagonal
// interaction exp(-i c_j dt |j><j| sigma_z^a).
inline QuantumState algorithmic_collision_step(const QuantumState& state,
                                               const ComplexMatrix& free_propagator,
                                               const CollisionConfig& cfg, int n_sites,
                                               RandomStream& rng) {
  if (state.kind != StateKind::Statevector) {
    throw ConfigError("algorithmic collision: statevector state required");
  }
  const int n_sys = algorithmic_qubits(n_sites);
  if (state.layout.n_qubits != n_sys + 1) {
    throw ConfigError("algorithmic collision: register must be system qubits plus one ancilla");
  }
  cfg.validate(n_sites);
  std::vector<int> sys_qubits(static_cast<std::size_t>(n_sys));
  for (int q = 1; q <= n_sys; ++q) sys_qubits[static_cast<std::size_t>(q - 1)] = q;
  QuantumState out = apply_unitary(state, free_propagator, sys_qubits);
  const int ancilla = n_sys + 1;
  for (int j = 1; j <= n_sites; ++j) {
    out = measure_and_reset(out, ancilla, rng).first;
    if (rng.bernoulli(0.5)) out = apply_unitary(out, pauli_x(), {ancilla});
    const double theta = cfg.coupling_for_site(j - 1) * cfg.delta_tau;
    const Eigen::Index site_index = encode_algorithmic(j, n_sites);
    for (Eigen::Index i = 0; i < out.amplitudes.size(); ++i) {
      if ((i >> 1) != site_index) continue;
      out.amplitudes[i] *= std::polar(1.0, (i & 1) ? theta : -theta);
    }
  }
  return out;
}

// Fast equivalent of repeated algorithmic_collision_step calls. The diagonal
// interaction never entangles the coin with the system, so the ancilla is
// tracked as a classical bit and each site costs one coin draw (the explicit
// form above also spends a draw on the reset measurement, so the two consume
// random streams differently). Immutable after construction; safe to share
// across threads.
struct AlgorithmicCollisionEngine {
  ExcitonNetwork network;
  CollisionConfig config;
  SimulationGrid grid;
  int source_site = 1;
  int target_site = 1;

  Eigen::Index sys_dim = 0;  // 2^ceil(log2 N)
  ComplexMatrix free_propagator;        // exp(-i H dt), site Hamiltonian embedded
  std::vector<Complex> phase_plus;      // e^{-i c_j dt} per site (coin 0)
  std::vector<Complex> phase_minus;     // e^{+i c_j dt} per site (coin 1)

  AlgorithmicCollisionEngine(const ExcitonNetwork& net, const CollisionConfig& cfg,
                             const SimulationGrid& g, int source, int target)
      : network(net), config(cfg), grid(g), source_site(source), target_site(target) {
    net.validate();
    cfg.validate(net.site_count());
    grid.validate();
    const int n = net.site_count();
    if (source < 1 || source > n || target < 1 || target > n) {
      throw ConfigError("algorithmic collision: source/target site out of range");
    }
    sys_dim = Eigen::Index{1} << algorithmic_qubits(n);
    ComplexMatrix h = ComplexMatrix::Zero(sys_dim, sys_dim);
    h.topLeftCorner(n, n) = site_hamiltonian(net);
    free_propagator = hermitian_expm(h, grid.delta_tau);
    for (int j = 1; j <= n; ++j) {
      const double theta = cfg.coupling_for_site(j - 1) * cfg.delta_tau;
      phase_plus.push_back(std::polar(1.0, -theta));
      phase_minus.push_back(std::polar(1.0, theta));
    }
  }

  TrajectoryRecord run(RandomStream rng, ReadoutMode readout) const {
    const int n = network.site_count();
    TrajectoryRecord rec;
    rec.stream_id = rng.id();
    rec.estimator.reserve(static_cast<std::size_t>(grid.steps + 1));

    ComplexVector psi = ComplexVector::Zero(sys_dim);
    psi[encode_algorithmic(source_site, n)] = 1.0;
    const Eigen::Index target_index = encode_algorithmic(target_site, n);
    auto record_sample = [&]() {
      const double p = std::norm(psi[target_index]);
      double pi = p;
      if (readout == ReadoutMode::SingleShot) {
        long ones = 0;
        for (long k = 0; k < grid.shots_per_point; ++k) ones += rng.bernoulli(p) ? 1 : 0;
        pi = static_cast<double>(ones) / static_cast<double>(grid.shots_per_point);
      }
      rec.estimator.push_back(pi);
    };

    record_sample();
    for (long s = 1; s <= grid.steps; ++s) {
      psi = free_propagator * psi;
      for (int j = 1; j <= n; ++j) {
        // Coin 0 leaves the ancilla in |0>, coin 1 flips it; either way the
        // joint state stays a product, so only site j's phase matters.
        const bool coin_one = rng.bernoulli(0.5);
        psi[encode_algorithmic(j, n)] *=
            coin_one ? phase_minus[static_cast<std::size_t>(j - 1)]
                     : phase_plus[static_cast<std::size_t>(j - 1)];
      }
      record_sample();
    }
    if (std::abs(psi.norm() - 1.0) > 1e-9) {
      throw NumericError("algorithmic collision: statevector norm drift beyond tolerance");
    }
    return rec;
  }
};

inline AveragedSeries run_algorithmic_collision_ensemble(const AlgorithmicCollisionEngine& engine,
                                                         long count, std::uint64_t master_seed,
                                                         ReadoutMode readout,
                                                         long batch_size = 256) {
  if (count < 1) throw ConfigError("ensemble: run count must be >= 1");
  detail::EnsembleAccumulator acc(engine.grid.delta_tau);
  std::vector<TrajectoryRecord> batch;
  for (long start = 0; start < count; start += batch_size) {
    const long m = std::min(batch_size, count - start);
    batch.assign(static_cast<std::size_t>(m), TrajectoryRecord{});
    parallel_for(m, [&](long i) {
      const long id = start + i + 1;
      RandomStream rng = RandomStream::derived(master_seed, static_cast<std::uint64_t>(id));
      batch[static_cast<std::size_t>(i)] = engine.run(std::move(rng), readout);
      batch[static_cast<std::size_t>(i)].id = id;
    });
    for (const auto& r : batch) acc.add(r);
  }
  return acc.finish(engine.source_site, engine.target_site);
}

}  // namespace enaqt
