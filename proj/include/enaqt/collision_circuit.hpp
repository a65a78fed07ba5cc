#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "enaqt/collision.hpp"
#include "enaqt/grid.hpp"
#include "enaqt/lindblad.hpp"
#include "enaqt/linalg.hpp"
#include "enaqt/network.hpp"
#include "enaqt/noise.hpp"
#include "enaqt/parallel.hpp"
#include "enaqt/state.hpp"

namespace enaqt {

// Gate vocabulary of the collision circuits. Rotation conventions:
//   RotZ(t)  = exp(-i t Z/2)            RotXX(t) = exp(-i t X(x)X / 2)
//   RotYY(t) = exp(-i t Y(x)Y / 2)      RotZX(t) = exp(-i t Z(x)X / 2)
// DiagonalPhase multiplies amplitudes whose target-register value equals
// `selector` by exp(-i angle). Reset measures its target in the Z basis and
// returns it to |0>.
enum class GateKind { PauliX, PauliZ, Identity, RotZ, RotXX, RotYY, RotZX, DiagonalPhase, Reset };

struct GateOp {
  GateKind kind = GateKind::Identity;
  double angle = 0.0;
  std::vector<int> targets;  // 1-based qubits; first target = high bit of the gate basis
  Eigen::Index selector = 0;  // DiagonalPhase only
};

// Dense matrix of a unitary gate (Reset has none; DiagonalPhase is applied
// directly because its dimension depends on the selector register).
inline ComplexMatrix gate_matrix(const GateOp& op) {
  const Complex i_unit(0.0, 1.0);
  const double c = std::cos(op.angle / 2.0);
  const double s = std::sin(op.angle / 2.0);
  switch (op.kind) {
    case GateKind::PauliX: return pauli_x();
    case GateKind::PauliZ: return pauli_z();
    case GateKind::Identity: return ComplexMatrix::Identity(2, 2);
    case GateKind::RotZ: {
      ComplexMatrix m = ComplexMatrix::Zero(2, 2);
      m(0, 0) = std::polar(1.0, -op.angle / 2.0);
      m(1, 1) = std::polar(1.0, op.angle / 2.0);
      return m;
    }
    case GateKind::RotXX: {
      ComplexMatrix m = c * ComplexMatrix::Identity(4, 4);
      m(0, 3) = m(1, 2) = m(2, 1) = m(3, 0) = -i_unit * s;
      return m;
    }
    case GateKind::RotYY: {
      ComplexMatrix m = c * ComplexMatrix::Identity(4, 4);
      m(0, 3) = m(3, 0) = i_unit * s;
      m(1, 2) = m(2, 1) = -i_unit * s;
      return m;
    }
    case GateKind::RotZX: {
      ComplexMatrix m = c * ComplexMatrix::Identity(4, 4);
      m(0, 1) = m(1, 0) = -i_unit * s;
      m(2, 3) = m(3, 2) = i_unit * s;
      return m;
    }
    default:
      throw ConfigError("gate_matrix: gate kind has no dense matrix");
  }
}

// One evolution block of the single-ancilla collision circuit (physical
// mapping, ancilla = qubit N+1). Per substep: RotZ(-eps_j dt/m) on every
// site qubit; RotXX and RotYY with angle V dt/m on every coupled pair; then,
// sites ascending, RotZX(2 c_j dt/m) on (site, ancilla) followed by a Reset.
inline std::vector<GateOp> trotter_gate_sequence(const ExcitonNetwork& net,
                                                 const CollisionConfig& cfg) {
  net.validate();
  const int n = net.site_count();
  cfg.validate(n);
  const int m = cfg.trotter_substeps;
  const double dt = cfg.delta_tau / m;
  const int ancilla = n + 1;
  std::vector<GateOp> seq;
  for (int r = 0; r < m; ++r) {
    for (int j = 1; j <= n; ++j) {
      seq.push_back({GateKind::RotZ, -net.site_energies[static_cast<std::size_t>(j - 1)] * dt,
                     {j}});
    }
    for (const auto& e : net.edges) {
      seq.push_back({GateKind::RotXX, e.coupling * dt, {e.site_a, e.site_b}});
      seq.push_back({GateKind::RotYY, e.coupling * dt, {e.site_a, e.site_b}});
    }
    for (int j = 1; j <= n; ++j) {
      seq.push_back({GateKind::RotZX, 2.0 * cfg.coupling_for_site(j - 1) * dt, {j, ancilla}});
      seq.push_back({GateKind::Reset, 0.0, {ancilla}});
    }
  }
  return seq;
}

// Deterministic-replacement form of one block: each (RotZX, Reset) pair is
// substituted by Identity (bit 0) or PauliZ (bit 1) on the system qubit, so a
// recorded run can be replayed without the ancilla.
inline std::vector<GateOp> replay_gate_sequence(const ExcitonNetwork& net,
                                                const CollisionConfig& cfg,
                                                const std::vector<std::uint8_t>& block_bits) {
  net.validate();
  const int n = net.site_count();
  cfg.validate(n);
  const int m = cfg.trotter_substeps;
  if (block_bits.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(m)) {
    throw ConfigError("replay_gate_sequence: need one bit per collision of the block");
  }
  const double dt = cfg.delta_tau / m;
  std::vector<GateOp> seq;
  std::size_t b = 0;
  for (int r = 0; r < m; ++r) {
    for (int j = 1; j <= n; ++j) {
      seq.push_back({GateKind::RotZ, -net.site_energies[static_cast<std::size_t>(j - 1)] * dt,
                     {j}});
    }
    for (const auto& e : net.edges) {
      seq.push_back({GateKind::RotXX, e.coupling * dt, {e.site_a, e.site_b}});
      seq.push_back({GateKind::RotYY, e.coupling * dt, {e.site_a, e.site_b}});
    }
    for (int j = 1; j <= n; ++j, ++b) {
      seq.push_back({block_bits[b] ? GateKind::PauliZ : GateKind::Identity, 0.0, {j}});
    }
  }
  return seq;
}

// Reset outcomes of one run in chronological order: step-major, then Trotter
// substep, then site ascending.
struct CollisionBitString {
  std::vector<std::uint8_t> bits;

  // Hex packing: 8 bits per byte, first bit is the most significant bit of
  // the first byte; the final byte is zero-padded.
  std::string to_hex() const {
    static const char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve((bits.size() + 7) / 8 * 2);
    for (std::size_t base = 0; base < bits.size(); base += 8) {
      unsigned byte = 0;
      for (std::size_t k = 0; k < 8; ++k) {
        byte <<= 1;
        if (base + k < bits.size() && bits[base + k]) byte |= 1;
      }
      out.push_back(digits[byte >> 4]);
      out.push_back(digits[byte & 0xF]);
    }
    return out;
  }

  static CollisionBitString from_hex(std::string_view hex, std::size_t bit_count) {
    if (hex.size() * 4 < bit_count) throw ConfigError("bit string: hex too short for bit count");
    CollisionBitString out;
    out.bits.resize(bit_count, 0);
    for (std::size_t i = 0; i < bit_count; ++i) {
      const char c = hex[i / 4];
      int nibble;
      if (c >= '0' && c <= '9') nibble = c - '0';
      else if (c >= 'a' && c <= 'f') nibble = c - 'a' + 10;
      else if (c >= 'A' && c <= 'F') nibble = c - 'A' + 10;
      else throw ConfigError("bit string: invalid hex digit");
      out.bits[i] = static_cast<std::uint8_t>((nibble >> (3 - i % 4)) & 1);
    }
    return out;
  }
};

struct CollisionRunResult {
  TrajectoryRecord record;
  CollisionBitString bits;  // empty unless recording was requested
  std::vector<ComplexMatrix> system_snapshots;
  std::vector<long> snapshot_steps;
};

namespace detail {

struct CompiledGate {
  enum Kind { OneQ, TwoQ, Collision } kind = OneQ;
  int pos1 = 0;  // bit position of the first target
  int pos2 = 0;
  int site = 0;                  // Collision: which site's bit is recorded
  std::array<Complex, 4> m2{};   // row-major 2x2
  std::array<Complex, 16> m4{};  // row-major 4x4

  static CompiledGate one_q(int pos, const ComplexMatrix& m) {
    CompiledGate g;
    g.kind = OneQ;
    g.pos1 = pos;
    g.m2 = {m(0, 0), m(0, 1), m(1, 0), m(1, 1)};
    return g;
  }

  static CompiledGate two_q(int pos1, int pos2, const ComplexMatrix& m) {
    CompiledGate g;
    g.kind = TwoQ;
    g.pos1 = pos1;
    g.pos2 = pos2;
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) g.m4[static_cast<std::size_t>(4 * r + c)] = m(r, c);
    }
    return g;
  }
};

inline void apply_one_q(ComplexVector& psi, const CompiledGate& g) {
  const Eigen::Index mask = Eigen::Index{1} << g.pos1;
  const Eigen::Index dim = psi.size();
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (i & mask) continue;
    const Complex a = psi[i];
    const Complex b = psi[i | mask];
    psi[i] = g.m2[0] * a + g.m2[1] * b;
    psi[i | mask] = g.m2[2] * a + g.m2[3] * b;
  }
}

inline void apply_two_q(ComplexVector& psi, const CompiledGate& g) {
  const Eigen::Index m1 = Eigen::Index{1} << g.pos1;
  const Eigen::Index m2 = Eigen::Index{1} << g.pos2;
  const Eigen::Index dim = psi.size();
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (i & (m1 | m2)) continue;
    const std::array<Complex, 4> v = {psi[i], psi[i | m2], psi[i | m1], psi[i | m1 | m2]};
    for (int r = 0; r < 4; ++r) {
      Complex acc = 0.0;
      for (int c = 0; c < 4; ++c) acc += g.m4[static_cast<std::size_t>(4 * r + c)] *
                                         v[static_cast<std::size_t>(c)];
      const Eigen::Index idx = i | (r & 2 ? m1 : 0) | (r & 1 ? m2 : 0);
      psi[idx] = acc;
    }
  }
}

inline double low_bit_one_probability(const ComplexVector& psi) {
  double p1 = 0.0;
  for (Eigen::Index i = 1; i < psi.size(); i += 2) p1 += std::norm(psi[i]);
  return p1;
}

// Projects the ancilla at bit position 0 onto `bit` and resets it to |0>.
inline void project_low_bit(ComplexVector& psi, int bit, double p1) {
  const Eigen::Index dim = psi.size();
  const double inv = 1.0 / std::sqrt(bit ? p1 : 1.0 - p1);
  if (bit) {
    for (Eigen::Index i = 0; i < dim; i += 2) {
      psi[i] = psi[i + 1] * inv;
      psi[i + 1] = 0.0;
    }
  } else {
    for (Eigen::Index i = 0; i < dim; i += 2) {
      psi[i] *= inv;
      psi[i + 1] = 0.0;
    }
  }
}

// Projective Z measurement + reset of the ancilla sitting at bit position 0.
inline int reset_low_bit(ComplexVector& psi, RandomStream& rng) {
  const double p1 = low_bit_one_probability(psi);
  const int bit = rng.bernoulli(p1) ? 1 : 0;
  project_low_bit(psi, bit, p1);
  return bit;
}

}  // namespace detail

// Precompiled single-ancilla collision circuit for one scenario (physical
// mapping, ancilla = qubit N+1). Immutable after construction; safe to share
// across threads.
struct CollisionCircuitEngine {
  ExcitonNetwork network;
  CollisionConfig config;
  SimulationGrid grid;
  int source_site = 1;
  int target_site = 1;

  int n_qubits = 0;          // N + 1 (run register)
  Eigen::Index dim = 0;      // 2^(N+1)
  Eigen::Index sys_dim = 0;  // 2^N
  long bits_per_step = 0;    // N * m
  std::vector<GateOp> block;               // public one-block gate sequence
  std::vector<detail::CompiledGate> run_ops;     // with Collision markers
  std::vector<detail::CompiledGate> replay_ops;  // free part, Collision = slot

  CollisionCircuitEngine(const ExcitonNetwork& net, const CollisionConfig& cfg,
                         const SimulationGrid& g, int source, int target)
      : network(net), config(cfg), grid(g), source_site(source), target_site(target) {
    net.validate();
    cfg.validate(net.site_count());
    grid.validate();
    const int n = net.site_count();
    if (source < 1 || source > n || target < 1 || target > n) {
      throw ConfigError("collision circuit: source/target site out of range");
    }
    if (n + 1 > 14) throw ConfigError("collision circuit: register too large (limit 14 qubits)");
    n_qubits = n + 1;
    dim = Eigen::Index{1} << n_qubits;
    sys_dim = Eigen::Index{1} << n;
    bits_per_step = static_cast<long>(n) * cfg.trotter_substeps;
    block = trotter_gate_sequence(net, cfg);
    for (std::size_t i = 0; i < block.size(); ++i) {
      const GateOp& op = block[i];
      switch (op.kind) {
        case GateKind::RotZ: {
          const int pos = n_qubits - op.targets[0];
          run_ops.push_back(detail::CompiledGate::one_q(pos, gate_matrix(op)));
          replay_ops.push_back(detail::CompiledGate::one_q(pos - 1, gate_matrix(op)));
          break;
        }
        case GateKind::RotXX:
        case GateKind::RotYY: {
          const int p1 = n_qubits - op.targets[0];
          const int p2 = n_qubits - op.targets[1];
          run_ops.push_back(detail::CompiledGate::two_q(p1, p2, gate_matrix(op)));
          replay_ops.push_back(detail::CompiledGate::two_q(p1 - 1, p2 - 1, gate_matrix(op)));
          break;
        }
        case GateKind::RotZX: {
          // Fused with the following Reset into one Collision op.
          detail::CompiledGate cg =
              detail::CompiledGate::two_q(n_qubits - op.targets[0], 0, gate_matrix(op));
          cg.kind = detail::CompiledGate::Collision;
          cg.site = op.targets[0];
          run_ops.push_back(cg);
          detail::CompiledGate slot;
          slot.kind = detail::CompiledGate::Collision;
          slot.site = op.targets[0];
          slot.pos1 = (n_qubits - op.targets[0]) - 1;  // system-register position
          replay_ops.push_back(slot);
          ++i;  // consume the paired Reset
          break;
        }
        default:
          throw ConfigError("collision circuit: unexpected gate in block");
      }
    }
  }

  double target_probability(const ComplexVector& psi, int register_qubits) const {
    const Eigen::Index mask = Eigen::Index{1} << (register_qubits - target_site);
    double p = 0.0;
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
      if (i & mask) p += std::norm(psi[i]);
    }
    return p;
  }

  RealVector site_populations(const ComplexVector& psi, int register_qubits) const {
    const int n = network.site_count();
    RealVector pops(n);
    for (int j = 1; j <= n; ++j) {
      const Eigen::Index mask = Eigen::Index{1} << (register_qubits - j);
      double acc = 0.0;
      for (Eigen::Index i = 0; i < psi.size(); ++i) {
        if (i & mask) acc += std::norm(psi[i]);
      }
      pops[j - 1] = acc;
    }
    return pops;
  }

  // One stochastic run. Reset outcomes are drawn from `rng`; when
  // `record_bits` is set they are kept in chronological order. Snapshots (the
  // system density matrix, taken while the ancilla sits in |0>) are stored
  // every `snapshot_stride` samples when the stride is positive. When
  // `forced_bits` is given the resets take the recorded outcomes instead of
  // drawing, through arithmetic identical to the original run, so a rerun of
  // a recorded trajectory reproduces its samples bit-for-bit.
  CollisionRunResult run(RandomStream rng, ReadoutMode readout, bool record_bits = false,
                         int snapshot_stride = 0,
                         const std::vector<std::uint8_t>* forced_bits = nullptr) const {
    CollisionRunResult result;
    TrajectoryRecord& rec = result.record;
    rec.stream_id = rng.id();
    rec.estimator.reserve(static_cast<std::size_t>(grid.steps + 1));
    if (record_bits) {
      result.bits.bits.reserve(static_cast<std::size_t>(bits_per_step * grid.steps));
    }

    ComplexVector psi = ComplexVector::Zero(dim);
    psi[encode_physical(source_site, network.site_count()) << 1] = 1.0;  // X on source qubit

    auto snapshot = [&](long s) {
      if (snapshot_stride <= 0 || s % snapshot_stride != 0) return;
      ComplexVector sys(sys_dim);
      for (Eigen::Index i = 0; i < sys_dim; ++i) sys[i] = psi[2 * i];  // ancilla is |0>
      result.system_snapshots.push_back(sys * sys.adjoint());
      result.snapshot_steps.push_back(s);
    };
    auto record_sample = [&]() {
      const double p = target_probability(psi, n_qubits);
      double pi = p;
      if (readout == ReadoutMode::SingleShot) {
        long ones = 0;
        for (long k = 0; k < grid.shots_per_point; ++k) ones += rng.bernoulli(p) ? 1 : 0;
        pi = static_cast<double>(ones) / static_cast<double>(grid.shots_per_point);
      }
      rec.estimator.push_back(pi);
    };

    if (forced_bits &&
        forced_bits->size() != static_cast<std::size_t>(bits_per_step * grid.steps)) {
      throw ConfigError("collision circuit: forced bit count does not match the grid");
    }
    std::size_t forced_index = 0;
    record_sample();
    snapshot(0);
    for (long s = 1; s <= grid.steps; ++s) {
      for (const auto& g : run_ops) {
        if (g.kind == detail::CompiledGate::OneQ) {
          detail::apply_one_q(psi, g);
        } else if (g.kind == detail::CompiledGate::TwoQ) {
          detail::apply_two_q(psi, g);
        } else {
          detail::apply_two_q(psi, g);  // the RotZX part
          int bit;
          if (forced_bits) {
            bit = (*forced_bits)[forced_index++];
            detail::project_low_bit(psi, bit, detail::low_bit_one_probability(psi));
          } else {
            bit = detail::reset_low_bit(psi, rng);
          }
          if (record_bits) result.bits.bits.push_back(static_cast<std::uint8_t>(bit));
        }
      }
      record_sample();
      snapshot(s);
    }
    if (std::abs(psi.norm() - 1.0) > 1e-9) {
      throw NumericError("collision circuit: statevector norm drift beyond tolerance");
    }
    return result;
  }

  // Deterministic replay of a recorded run on the system register alone:
  // every (RotZX, Reset) pair is replaced by Identity or PauliZ according to
  // the recorded bit. Reproduces the run's per-step populations exactly (the
  // substitution differs from the post-measurement state only by a global
  // phase).
  PopulationSeries replay(const CollisionBitString& bits) const {
    if (bits.bits.size() != static_cast<std::size_t>(bits_per_step * grid.steps)) {
      throw ConfigError("replay: bit count does not match the grid");
    }
    const int n = network.site_count();
    PopulationSeries series;
    series.delta_tau = grid.delta_tau;
    series.source_site = source_site;
    series.target_site = target_site;
    series.target_index = target_site - 1;
    series.times.reserve(static_cast<std::size_t>(grid.steps + 1));
    series.populations.reserve(static_cast<std::size_t>(grid.steps + 1));

    ComplexVector psi = ComplexVector::Zero(sys_dim);
    psi[encode_physical(source_site, n)] = 1.0;
    auto record_sample = [&](long s) {
      series.times.push_back(s * grid.delta_tau);
      series.populations.push_back(site_populations(psi, n));
    };
    record_sample(0);
    std::size_t b = 0;
    for (long s = 1; s <= grid.steps; ++s) {
      for (const auto& g : replay_ops) {
        if (g.kind == detail::CompiledGate::OneQ) {
          detail::apply_one_q(psi, g);
        } else if (g.kind == detail::CompiledGate::TwoQ) {
          detail::apply_two_q(psi, g);
        } else {
          if (bits.bits[b++]) {
            const Eigen::Index mask = Eigen::Index{1} << g.pos1;
            for (Eigen::Index i = 0; i < sys_dim; ++i) {
              if (i & mask) psi[i] = -psi[i];
            }
          }
        }
      }
      record_sample(s);
    }
    return series;
  }
};

inline CollisionRunResult run_collision_circuit(const ExcitonNetwork& net,
                                                const CollisionConfig& cfg,
                                                const SimulationGrid& grid, int source, int target,
                                                RandomStream rng, ReadoutMode readout,
                                                bool record_bits = false) {
  const CollisionCircuitEngine engine(net, cfg, grid, source, target);
  return engine.run(std::move(rng), readout, record_bits);
}

inline PopulationSeries replay_from_bits(const ExcitonNetwork& net, const CollisionConfig& cfg,
                                         const SimulationGrid& grid, int source,
                                         const CollisionBitString& bits, int target = 0) {
  const CollisionCircuitEngine engine(net, cfg, grid, source, target > 0 ? target : source);
  PopulationSeries series = engine.replay(bits);
  if (target == 0) {
    series.target_site = 0;
    series.target_index = -1;
  }
  return series;
}

// Batched ensemble of collision runs, reduced in trajectory-id order (same
// reduction as the classical-noise ensemble).
inline AveragedSeries run_collision_ensemble(const CollisionCircuitEngine& engine, long count,
                                             std::uint64_t master_seed, ReadoutMode readout,
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
      batch[static_cast<std::size_t>(i)] = engine.run(std::move(rng), readout).record;
      batch[static_cast<std::size_t>(i)].id = id;
    });
    for (const auto& r : batch) acc.add(r);
  }
  return acc.finish(engine.source_site, engine.target_site);
}

// Materialized runs for dumps; optionally records each run's reset bits.
inline std::vector<CollisionRunResult> run_collision_records(const CollisionCircuitEngine& engine,
                                                             long count,
                                                             std::uint64_t master_seed,
                                                             ReadoutMode readout,
                                                             bool record_bits = false) {
  if (count < 1) throw ConfigError("ensemble: run count must be >= 1");
  std::vector<CollisionRunResult> results(static_cast<std::size_t>(count));
  parallel_for(count, [&](long i) {
    const long id = i + 1;
    RandomStream rng = RandomStream::derived(master_seed, static_cast<std::uint64_t>(id));
    results[static_cast<std::size_t>(i)] = engine.run(std::move(rng), readout, record_bits);
    results[static_cast<std::size_t>(i)].record.id = id;
  });
  return results;
}

struct ChannelTomography1q {
  double p_z = 0.0;          // reconstructed Z-kick probability
  double max_deviation = 0.0;  // worst entry vs (1-p) rho + p Z rho Z with p = sin^2(c dt)
};

// Reconstructs the effective single-qubit channel of one (RotZX(2 c dt),
// Reset) pair by driving the circuit primitive with a spanning set of inputs,
// then compares against the analytic phase-kick channel.
inline ChannelTomography1q channel_tomography_1q(const CollisionConfig& cfg) {
  cfg.validate(1);
  const double theta = cfg.coupling_for_site(0) * cfg.delta_tau;
  const GateOp rzx{GateKind::RotZX, 2.0 * theta, {1, 2}};
  const ComplexMatrix u = gate_matrix(rzx);

  auto channel = [&](const ComplexMatrix& rho_in) {
    ComplexMatrix anc = ComplexMatrix::Zero(2, 2);
    anc(0, 0) = 1.0;
    QuantumState joint;
    joint.kind = StateKind::Density;
    joint.layout.n_qubits = 2;
    joint.rho = kron(rho_in, anc);
    joint = apply_unitary(joint, u, {1, 2});
    return trace_out_ancilla(joint, 2).rho;
  };

  // Matrix units E_ab recovered from four physical probes.
  ComplexMatrix e00 = ComplexMatrix::Zero(2, 2), e11 = ComplexMatrix::Zero(2, 2);
  e00(0, 0) = 1.0;
  e11(1, 1) = 1.0;
  ComplexMatrix plus(2, 2), plus_i(2, 2);
  plus << 0.5, 0.5, 0.5, 0.5;
  plus_i << Complex(0.5, 0.0), Complex(0.0, -0.5), Complex(0.0, 0.5), Complex(0.5, 0.0);
  const ComplexMatrix f00 = channel(e00);
  const ComplexMatrix f11 = channel(e11);
  const ComplexMatrix a = channel(plus) - 0.5 * (f00 + f11);
  const ComplexMatrix b = channel(plus_i) - 0.5 * (f00 + f11);
  const Complex i_unit(0.0, 1.0);
  const ComplexMatrix f01 = a + i_unit * b;
  const ComplexMatrix f10 = a - i_unit * b;

  const double p = std::sin(theta) * std::sin(theta);
  const ComplexMatrix z = pauli_z();
  auto analytic = [&](const ComplexMatrix& e) { return ((1.0 - p) * e + p * z * e * z).eval(); };
  ComplexMatrix e01 = ComplexMatrix::Zero(2, 2), e10 = ComplexMatrix::Zero(2, 2);
  e01(0, 1) = 1.0;
  e10(1, 0) = 1.0;

  ChannelTomography1q out;
  out.p_z = 0.5 * (1.0 - f01(0, 1).real());
  out.max_deviation = std::max({max_abs(f00 - analytic(e00)), max_abs(f11 - analytic(e11)),
                                max_abs(f01 - analytic(e01)), max_abs(f10 - analytic(e10))});
  return out;
}

}  // namespace enaqt
