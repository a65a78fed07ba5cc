#pragma once

#include <cmath>
#include <cstdlib>
#include <vector>

#include "enaqt/grid.hpp"
#include "enaqt/linalg.hpp"
#include "enaqt/network.hpp"
#include "enaqt/pauli.hpp"
#include "enaqt/state.hpp"

namespace enaqt {

// Master equation drho/dt = -i[H, rho] + sum_k rate_k D[L_k](rho) with
// D[L](rho) = L rho L^dagger - (1/2){L^dagger L, rho}.
struct LindbladProblem {
  ComplexMatrix hamiltonian;
  std::vector<ComplexMatrix> jump_operators;
  std::vector<double> rates;
  QuantumState initial_state;  // density kind

  void validate() const {
    const Eigen::Index d = hamiltonian.rows();
    if (d < 1 || hamiltonian.cols() != d) throw ConfigError("lindblad: Hamiltonian must be square");
    if (!is_hermitian(hamiltonian)) throw NumericError("lindblad: Hamiltonian is not Hermitian");
    if (jump_operators.size() != rates.size()) {
      throw ConfigError("lindblad: jump operator and rate counts differ");
    }
    for (const auto& l : jump_operators) {
      if (l.rows() != d || l.cols() != d) {
        throw ConfigError("lindblad: jump operator dimension mismatch");
      }
    }
    for (double r : rates) {
      if (!(r >= 0.0)) throw ConfigError("lindblad: rates must be >= 0");
    }
    if (initial_state.kind != StateKind::Density || initial_state.dim() != d) {
      throw ConfigError("lindblad: initial state must be a density matrix of matching dimension");
    }
  }
};

inline ComplexMatrix lindblad_rhs(const ComplexMatrix& rho, const LindbladProblem& p) {
  const Complex i_unit(0.0, 1.0);
  ComplexMatrix out = -i_unit * (p.hamiltonian * rho - rho * p.hamiltonian);
  for (std::size_t k = 0; k < p.jump_operators.size(); ++k) {
    const double g = p.rates[k];
    if (g == 0.0) continue;
    const ComplexMatrix& l = p.jump_operators[k];
    const ComplexMatrix ldl = l.adjoint() * l;
    out += g * (l * rho * l.adjoint() - 0.5 * (ldl * rho + rho * ldl));
  }
  return out;
}

namespace detail {

// Right-hand side with the dissipator prepared once. When every jump operator
// is diagonal (site projectors, Pauli Z), the whole dissipator collapses to an
// entrywise mask, which keeps long integrations cheap.
struct PreparedLindblad {
  const LindbladProblem* problem;
  bool diagonal_dissipator = true;
  ComplexMatrix mask;
  std::vector<ComplexMatrix> ldl;

  explicit PreparedLindblad(const LindbladProblem& p) : problem(&p) {
    const Eigen::Index d = p.hamiltonian.rows();
    for (const auto& l : p.jump_operators) {
      for (Eigen::Index i = 0; i < d && diagonal_dissipator; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
          if (i != j && l(i, j) != Complex(0.0, 0.0)) {
            diagonal_dissipator = false;
            break;
          }
        }
      }
    }
    if (diagonal_dissipator) {
      mask = ComplexMatrix::Zero(d, d);
      for (std::size_t k = 0; k < p.jump_operators.size(); ++k) {
        const double g = p.rates[k];
        if (g == 0.0) continue;
        const ComplexMatrix& l = p.jump_operators[k];
        for (Eigen::Index i = 0; i < d; ++i) {
          for (Eigen::Index j = 0; j < d; ++j) {
            mask(i, j) += g * (l(i, i) * std::conj(l(j, j)) -
                               0.5 * (std::norm(l(i, i)) + std::norm(l(j, j))));
          }
        }
      }
    } else {
      for (const auto& l : p.jump_operators) ldl.push_back(l.adjoint() * l);
    }
  }

  ComplexMatrix rhs(const ComplexMatrix& rho) const {
    const Complex i_unit(0.0, 1.0);
    ComplexMatrix out = -i_unit * (problem->hamiltonian * rho - rho * problem->hamiltonian);
    if (diagonal_dissipator) {
      if (mask.size() > 0) out += mask.cwiseProduct(rho);
    } else {
      for (std::size_t k = 0; k < problem->jump_operators.size(); ++k) {
        const double g = problem->rates[k];
        if (g == 0.0) continue;
        const ComplexMatrix& l = problem->jump_operators[k];
        out += g * (l * rho * l.adjoint() - 0.5 * (ldl[k] * rho + rho * ldl[k]));
      }
    }
    return out;
  }

  void rk4_advance(ComplexMatrix& rho, double h, int substeps) const {
    for (int s = 0; s < substeps; ++s) {
      const ComplexMatrix k1 = rhs(rho);
      const ComplexMatrix k2 = rhs(rho + (0.5 * h) * k1);
      const ComplexMatrix k3 = rhs(rho + (0.5 * h) * k2);
      const ComplexMatrix k4 = rhs(rho + h * k3);
      rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  }
};

}  // namespace detail

// Site populations (or full basis diagonal) sampled every delta_tau.
struct PopulationSeries {
  double delta_tau = 0.0;
  int source_site = 0;            // 1-based labels, 0 = unset
  int target_site = 0;
  Eigen::Index target_index = -1;  // storage index of the target population
  std::vector<double> times;
  std::vector<RealVector> populations;

  std::vector<double> target_series() const {
    if (target_index < 0) throw ConfigError("population series: target index unset");
    std::vector<double> out;
    out.reserve(populations.size());
    for (const auto& p : populations) {
      if (target_index >= p.size()) throw ConfigError("population series: target index out of range");
      out.push_back(p[target_index]);
    }
    return out;
  }
};

struct IntegrationOptions {
  int substeps_per_sample = 10;  // RK4 step h = delta_tau / substeps
  int snapshot_stride = 0;       // keep rho every k-th sample (0 = none)
  bool check_positivity = true;
  int accuracy_check_stride = 512;  // half-step comparison cadence
};

struct IntegrationResult {
  PopulationSeries series;
  std::vector<ComplexMatrix> snapshots;
  std::vector<long> snapshot_steps;
};

// Fixed-step RK4 integration of the master equation, sampled on the grid.
// Guards: the first interval (and periodically after) is re-integrated with
// half steps and must agree to 1e-6; trace drift beyond 1e-9 or an eigenvalue
// below -1e-7 aborts with a NumericError.
inline IntegrationResult integrate_master_equation(const LindbladProblem& problem,
                                                   const SimulationGrid& grid,
                                                   const IntegrationOptions& options = {}) {
  problem.validate();
  grid.validate();
  if (options.substeps_per_sample < 1) throw ConfigError("integrate: substeps must be >= 1");
  const detail::PreparedLindblad prep(problem);
  const double h = grid.delta_tau / options.substeps_per_sample;
  const Eigen::Index d = problem.hamiltonian.rows();

  ComplexMatrix rho = problem.initial_state.rho;
  IntegrationResult result;
  result.series.delta_tau = grid.delta_tau;
  result.series.times.reserve(static_cast<std::size_t>(grid.steps + 1));
  result.series.populations.reserve(static_cast<std::size_t>(grid.steps + 1));

  auto record = [&](long s) {
    result.series.times.push_back(s * grid.delta_tau);
    RealVector pops(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      double v = rho(i, i).real();
      if (v < 0.0 && v >= -1e-12) v = 0.0;
      pops[i] = v;
    }
    result.series.populations.push_back(std::move(pops));
    if (options.snapshot_stride > 0 && s % options.snapshot_stride == 0) {
      result.snapshots.push_back(rho);
      result.snapshot_steps.push_back(s);
    }
  };

  record(0);
  for (long s = 1; s <= grid.steps; ++s) {
    const bool check_accuracy =
        s == 1 || (options.accuracy_check_stride > 0 && s % options.accuracy_check_stride == 0);
    ComplexMatrix reference;
    if (check_accuracy) {
      reference = rho;
      prep.rk4_advance(reference, 0.5 * h, 2 * options.substeps_per_sample);
    }
    prep.rk4_advance(rho, h, options.substeps_per_sample);
    if (check_accuracy && max_abs(rho - reference) > 1e-6) {
      throw NumericError("integrate: refinement check failed, reduce delta_tau");
    }
    rho = 0.5 * (rho + rho.adjoint()).eval();  // keep Hermitian against roundoff drift
    if (std::abs(rho.trace().real() - 1.0) > 1e-9) {
      throw NumericError("integrate: trace drift beyond tolerance");
    }
    if (options.check_positivity && d <= 64) {
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho, Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() < -1e-7) {
        throw NumericError("integrate: positivity violation beyond diagnostic threshold");
      }
    }
    record(s);
  }
  return result;
}

// Site-basis dephasing problem: H = site Hamiltonian, one projector jump
// |j><j| per site with rate gamma_j, started from the source site.
inline LindbladProblem site_dephasing_problem(const ExcitonNetwork& net, int source_site) {
  net.validate();
  const int n = net.site_count();
  if (source_site < 1 || source_site > n) throw ConfigError("lindblad: source site out of range");
  LindbladProblem p;
  p.hamiltonian = site_hamiltonian(net);
  for (int j = 0; j < n; ++j) {
    ComplexMatrix proj = ComplexMatrix::Zero(n, n);
    proj(j, j) = 1.0;
    p.jump_operators.push_back(std::move(proj));
    p.rates.push_back(net.dephasing_rates[static_cast<std::size_t>(j)]);
  }
  ComplexMatrix rho0 = ComplexMatrix::Zero(n, n);
  rho0(source_site - 1, source_site - 1) = 1.0;
  p.initial_state = QuantumState::density(std::move(rho0), algorithmic_qubits(n));
  return p;
}

// One-qubit-per-site form of the same dynamics: H from qubit_hamiltonian,
// jumps Z_j with rates gamma_j / 4. Equivalent to the site-basis problem on
// the single-excitation manifold.
inline LindbladProblem qubit_form_problem(const ExcitonNetwork& net, int source_site = 1) {
  net.validate();
  const int n = net.site_count();
  if (source_site < 1 || source_site > n) throw ConfigError("lindblad: source site out of range");
  const Eigen::Index d = Eigen::Index{1} << n;
  LindbladProblem p;
  p.hamiltonian = assemble_pauli_terms(qubit_hamiltonian(net), n);
  for (int j = 1; j <= n; ++j) {
    ComplexMatrix z = ComplexMatrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      z(i, i) = ((i >> (n - j)) & 1) ? -1.0 : 1.0;
    }
    p.jump_operators.push_back(std::move(z));
    p.rates.push_back(net.dephasing_rates[static_cast<std::size_t>(j - 1)] / 4.0);
  }
  ComplexMatrix rho0 = ComplexMatrix::Zero(d, d);
  const Eigen::Index idx = encode_physical(source_site, n);
  rho0(idx, idx) = 1.0;
  p.initial_state = QuantumState::density(std::move(rho0), n);
  return p;
}

// Transport efficiency: left Riemann sum of the target population including
// the s = 0 sample, eta = sum_{s=0}^{S} p_target(s dt) * dt.
inline double transport_efficiency(const PopulationSeries& series, double delta_tau) {
  if (delta_tau <= 0.0) throw ConfigError("transport_efficiency: delta_tau must be positive");
  double acc = 0.0;
  for (double p : series.target_series()) acc += p;
  return acc * delta_tau;
}

inline double transport_efficiency(const PopulationSeries& series) {
  return transport_efficiency(series, series.delta_tau);
}

struct EfficiencyPoint {
  double gamma = 0.0;      // dephasing rate for this point
  double delta_tau = 0.0;  // grid actually used at this point
  double eta = 0.0;
  double eta_stderr = 0.0;  // 0 for deterministic backends
  double eta_oracle = 0.0;
};

struct EfficiencyCurve {
  std::vector<EfficiencyPoint> points;
};

}  // namespace enaqt
