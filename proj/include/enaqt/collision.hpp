#pragma once

#include <cmath>
#include <vector>

#include "enaqt/grid.hpp"
#include "enaqt/lindblad.hpp"
#include "enaqt/linalg.hpp"
#include "enaqt/network.hpp"
#include "enaqt/pauli.hpp"

namespace enaqt {

// Collision-model parameters: site-ancilla couplings c_j, collision duration
// delta_tau, Trotter substeps per evolution block, and the register mapping.
//
// c_j is chosen so one collision per step reproduces the requested dephasing
// rate, c_j^2 * delta_tau = rate of the jump operator being realized:
//   Physical mapping  (interaction c_j Z_j X_a, jump Z_j):      rate gamma_j/4
//   Algorithmic mapping (interaction c_j |j><j| Z_a, jump |j><j|): rate gamma_j
struct CollisionConfig {
  std::vector<double> couplings;  // c_j; size 1 broadcasts to all sites
  double delta_tau = 0.01;
  int trotter_substeps = 1;  // m
  Mapping mapping = Mapping::Physical;

  static CollisionConfig from_network_rates(const ExcitonNetwork& net, double delta_tau,
                                            int substeps = 1,
                                            Mapping mapping = Mapping::Physical) {
    net.validate();
    if (delta_tau <= 0.0) throw ConfigError("collision: delta_tau must be positive");
    CollisionConfig c;
    c.delta_tau = delta_tau;
    c.trotter_substeps = substeps;
    c.mapping = mapping;
    const double rate_scale = mapping == Mapping::Physical ? 0.25 : 1.0;
    for (double g : net.dephasing_rates) {
      c.couplings.push_back(std::sqrt(rate_scale * g / delta_tau));
    }
    return c;
  }

  double coupling_for_site(int site_index0) const {
    if (couplings.size() == 1) return couplings[0];
    return couplings[static_cast<std::size_t>(site_index0)];
  }

  void validate(int n_sites) const {
    if (delta_tau <= 0.0) throw ConfigError("collision: delta_tau must be positive");
    if (trotter_substeps < 1) throw ConfigError("collision: substeps must be >= 1");
    if (couplings.size() != 1 && couplings.size() != static_cast<std::size_t>(n_sites)) {
      throw ConfigError("collision: coupling list must have 1 or site-count entries");
    }
    for (double c : couplings) {
      if (!(c >= 0.0)) throw ConfigError("collision: couplings must be >= 0");
    }
  }
};

// Joint system-ancilla Hamiltonian H_ex (x) I + sum_j c_j Z_j X_{a_j} in the
// physical mapping, with either one ancilla per site (a_j = N + j, the exact
// collision map) or a single shared ancilla (a_j = N + 1, the circuit form).
inline ComplexMatrix collision_hamiltonian(const ExcitonNetwork& net, const CollisionConfig& cfg,
                                           int ancilla_count) {
  net.validate();
  const int n = net.site_count();
  cfg.validate(n);
  if (ancilla_count != 1 && ancilla_count != n) {
    throw ConfigError("collision_hamiltonian: ancilla count must be 1 or the site count");
  }
  if (n + ancilla_count > 14) {
    throw ConfigError("collision_hamiltonian: register too large (limit 14 qubits)");
  }
  const int nq = n + ancilla_count;
  std::vector<PauliTerm> terms = qubit_hamiltonian(net);
  for (int j = 1; j <= n; ++j) {
    const int ancilla = ancilla_count == 1 ? n + 1 : n + j;
    terms.push_back({cfg.coupling_for_site(j - 1),
                     {{j, PauliAxis::Z}, {ancilla, PauliAxis::X}}});
  }
  return assemble_pauli_terms(terms, nq);
}

// Exact one-step collision channel: rho -> Tr_anc[ U (rho (x) |0..0><0..0|) U^dagger ]
// with one fresh ancilla per site, in Kraus form K_k = (I (x) <k|) U (I (x) |0..0>).
struct CollisionChannel {
  Eigen::Index system_dim = 0;
  std::vector<ComplexMatrix> kraus;

  ComplexMatrix apply(const ComplexMatrix& rho) const {
    if (rho.rows() != system_dim || rho.cols() != system_dim) {
      throw ConfigError("collision channel: dimension mismatch");
    }
    ComplexMatrix out = ComplexMatrix::Zero(system_dim, system_dim);
    for (const auto& k : kraus) out += k * rho * k.adjoint();
    return out;
  }
};

inline CollisionChannel make_exact_collision_channel(const ExcitonNetwork& net,
                                                     const CollisionConfig& cfg) {
  const int n = net.site_count();
  const ComplexMatrix u = hermitian_expm(collision_hamiltonian(net, cfg, n), cfg.delta_tau);
  const Eigen::Index sys_dim = Eigen::Index{1} << n;
  const Eigen::Index anc_dim = Eigen::Index{1} << n;
  CollisionChannel ch;
  ch.system_dim = sys_dim;
  ch.kraus.reserve(static_cast<std::size_t>(anc_dim));
  for (Eigen::Index k = 0; k < anc_dim; ++k) {
    ComplexMatrix kr(sys_dim, sys_dim);
    for (Eigen::Index i = 0; i < sys_dim; ++i) {
      for (Eigen::Index ip = 0; ip < sys_dim; ++ip) {
        kr(i, ip) = u(i * anc_dim + k, ip * anc_dim);
      }
    }
    ch.kraus.push_back(std::move(kr));
  }
  ComplexMatrix completeness = ComplexMatrix::Zero(sys_dim, sys_dim);
  for (const auto& k : ch.kraus) completeness += k.adjoint() * k;
  if (max_abs(completeness - ComplexMatrix::Identity(sys_dim, sys_dim)) > 1e-10) {
    throw NumericError("collision channel: Kraus completeness violated");
  }
  return ch;
}

// One application of the exact collision channel. Iterating many steps is
// cheaper through make_exact_collision_channel + CollisionChannel::apply.
inline ComplexMatrix exact_collision_map(const ComplexMatrix& rho_system,
                                         const ExcitonNetwork& net, const CollisionConfig& cfg) {
  return make_exact_collision_channel(net, cfg).apply(rho_system);
}

// Column-stacking superoperator S with vec(channel(rho)) = S vec(rho);
// vec(K rho K^dagger) = (conj(K) (x) K) vec(rho).
inline ComplexMatrix channel_superoperator(const CollisionChannel& ch) {
  const Eigen::Index d = ch.system_dim;
  ComplexMatrix s = ComplexMatrix::Zero(d * d, d * d);
  for (const auto& k : ch.kraus) s += kron(k.conjugate(), k);
  return s;
}

// Deterministic density-matrix iteration of the exact collision channel on
// the sample grid, recording per-site populations (occupied-qubit marginals
// of the physical mapping).
inline PopulationSeries iterate_collision_channel(const ExcitonNetwork& net,
                                                  const CollisionConfig& cfg,
                                                  const SimulationGrid& grid, int source,
                                                  int target) {
  net.validate();
  grid.validate();
  const int n = net.site_count();
  if (source < 1 || source > n || target < 1 || target > n) {
    throw ConfigError("collision channel: source/target site out of range");
  }
  const CollisionChannel ch = make_exact_collision_channel(net, cfg);
  const ComplexMatrix s = channel_superoperator(ch);
  const Eigen::Index d = ch.system_dim;

  PopulationSeries series;
  series.delta_tau = grid.delta_tau;
  series.source_site = source;
  series.target_site = target;
  series.target_index = target - 1;
  ComplexMatrix rho = ComplexMatrix::Zero(d, d);
  const Eigen::Index i0 = encode_physical(source, n);
  rho(i0, i0) = 1.0;
  Eigen::Map<ComplexVector> vec(rho.data(), d * d);

  auto record = [&](long step) {
    series.times.push_back(step * grid.delta_tau);
    RealVector pops(n);
    for (int j = 1; j <= n; ++j) {
      const Eigen::Index mask = Eigen::Index{1} << (n - j);
      double acc = 0.0;
      for (Eigen::Index i = 0; i < d; ++i) {
        if (i & mask) acc += rho(i, i).real();
      }
      pops[j - 1] = acc;
    }
    series.populations.push_back(std::move(pops));
  };
  record(0);
  ComplexVector next(d * d);
  for (long step = 1; step <= grid.steps; ++step) {
    next.noalias() = s * vec;
    vec = next;
    if (std::abs(rho.trace().real() - 1.0) > 1e-9) {
      throw NumericError("collision channel: trace drift beyond tolerance");
    }
    record(step);
  }
  return series;
}

}  // namespace enaqt
