#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "enaqt/linalg.hpp"
#include "enaqt/random.hpp"

namespace enaqt {

enum class StateKind { Statevector, Density };

// Computational-basis convention: qubit 1 is the most significant bit, so
// |q1 q2 ... qn> has index sum_k q_k 2^(n-k). Site-basis states (no qubit
// structure) may carry dim < 2^n_qubits; qubit operations reject those.
struct BasisLayout {
  int n_qubits = 0;
};

inline int qubit_bit_position(int n_qubits, int qubit) {
  if (qubit < 1 || qubit > n_qubits) throw NumericError("qubit index out of range");
  return n_qubits - qubit;
}

struct QuantumState {
  StateKind kind = StateKind::Statevector;
  BasisLayout layout;
  ComplexVector amplitudes;  // Statevector kind
  ComplexMatrix rho;         // Density kind

  Eigen::Index dim() const {
    return kind == StateKind::Statevector ? amplitudes.size() : rho.rows();
  }

  bool qubit_structured() const { return dim() == (Eigen::Index{1} << layout.n_qubits); }

  // |0...0> on n qubits.
  static QuantumState zero_state(int n_qubits) { return basis_state(n_qubits, 0); }

  static QuantumState basis_state(int n_qubits, Eigen::Index index) {
    const Eigen::Index d = Eigen::Index{1} << n_qubits;
    if (index < 0 || index >= d) throw NumericError("basis_state: index out of range");
    QuantumState s;
    s.layout.n_qubits = n_qubits;
    s.amplitudes = ComplexVector::Zero(d);
    s.amplitudes[index] = 1.0;
    return s;
  }

  static QuantumState statevector(ComplexVector v, int n_qubits) {
    if (std::abs(v.norm() - 1.0) > 1e-8) throw NumericError("statevector: not normalized");
    QuantumState s;
    s.layout.n_qubits = n_qubits;
    s.amplitudes = std::move(v);
    return s;
  }

  static QuantumState density(ComplexMatrix m, int n_qubits) {
    if (!is_hermitian(m, 1e-10)) throw NumericError("density: matrix is not Hermitian");
    if (std::abs(m.trace().real() - 1.0) > 1e-8) throw NumericError("density: trace is not 1");
    if (m.rows() <= 256) {
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m, Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() < -1e-10) {
        throw NumericError("density: matrix is not positive semidefinite");
      }
    }
    QuantumState s;
    s.kind = StateKind::Density;
    s.layout.n_qubits = n_qubits;
    s.rho = std::move(m);
    return s;
  }

  QuantumState to_density() const {
    if (kind == StateKind::Density) return *this;
    QuantumState s;
    s.kind = StateKind::Density;
    s.layout = layout;
    s.rho = amplitudes * amplitudes.adjoint();
    return s;
  }
};

namespace detail {

// In-place action of a 2^k-dimensional gate on the listed bit positions of a
// full-register vector. Gate basis: the first listed position is the most
// significant bit of the gate index.
inline void apply_gate_to_vector(Eigen::Ref<ComplexVector> v, const ComplexMatrix& u,
                                 const std::vector<int>& positions) {
  const int k = static_cast<int>(positions.size());
  const Eigen::Index gdim = Eigen::Index{1} << k;
  Eigen::Index tmask = 0;
  for (int p : positions) tmask |= Eigen::Index{1} << p;
  std::vector<Eigen::Index> offs(gdim, 0);
  for (Eigen::Index g = 0; g < gdim; ++g) {
    for (int t = 0; t < k; ++t) {
      if ((g >> (k - 1 - t)) & 1) offs[g] |= Eigen::Index{1} << positions[t];
    }
  }
  ComplexVector buf(gdim);
  const Eigen::Index dim = v.size();
  for (Eigen::Index base = 0; base < dim; ++base) {
    if (base & tmask) continue;
    for (Eigen::Index g = 0; g < gdim; ++g) buf[g] = v[base + offs[g]];
    for (Eigen::Index g = 0; g < gdim; ++g) {
      Complex acc = 0.0;
      for (Eigen::Index h = 0; h < gdim; ++h) acc += u(g, h) * buf[h];
      v[base + offs[g]] = acc;
    }
  }
}

}  // namespace detail

// Applies a unitary on the listed target qubits (1-based). Statevector kind
// gets U|psi>; density kind gets U rho U^dagger.
inline QuantumState apply_unitary(const QuantumState& state, const ComplexMatrix& u,
                                  const std::vector<int>& targets) {
  if (!state.qubit_structured()) throw NumericError("apply_unitary: state has no qubit structure");
  if (targets.empty()) throw NumericError("apply_unitary: no target qubits");
  const int n = state.layout.n_qubits;
  std::vector<int> positions;
  positions.reserve(targets.size());
  for (int q : targets) positions.push_back(qubit_bit_position(n, q));
  for (std::size_t i = 0; i < targets.size(); ++i) {
    for (std::size_t j = i + 1; j < targets.size(); ++j) {
      if (targets[i] == targets[j]) throw NumericError("apply_unitary: duplicate target qubit");
    }
  }
  const Eigen::Index gdim = Eigen::Index{1} << targets.size();
  if (u.rows() != gdim || u.cols() != gdim) {
    throw NumericError("apply_unitary: gate dimension does not match target count");
  }
  if (!is_unitary(u, 1e-10)) throw NumericError("apply_unitary: gate is not unitary");

  QuantumState out = state;
  if (out.kind == StateKind::Statevector) {
    detail::apply_gate_to_vector(out.amplitudes, u, positions);
  } else {
    // U rho U^dagger == (U (U rho)^dagger)^dagger, two column passes.
    for (Eigen::Index c = 0; c < out.rho.cols(); ++c) {
      detail::apply_gate_to_vector(out.rho.col(c), u, positions);
    }
    out.rho.adjointInPlace();
    for (Eigen::Index c = 0; c < out.rho.cols(); ++c) {
      detail::apply_gate_to_vector(out.rho.col(c), u, positions);
    }
    out.rho.adjointInPlace();
  }
  return out;
}

// Basis-outcome probabilities. Density diagonals in [-1e-12, 0) are clipped
// to zero; they arise from benign rounding in long integrations.
inline RealVector basis_probabilities(const QuantumState& state) {
  const Eigen::Index d = state.dim();
  RealVector p(d);
  if (state.kind == StateKind::Statevector) {
    for (Eigen::Index i = 0; i < d; ++i) p[i] = std::norm(state.amplitudes[i]);
  } else {
    for (Eigen::Index i = 0; i < d; ++i) {
      double v = state.rho(i, i).real();
      if (v < 0.0 && v >= -1e-12) v = 0.0;
      p[i] = v;
    }
  }
  return p;
}

// Multinomial basis-measurement counts for `shots` repetitions.
inline std::vector<long> sample_shots(const RealVector& probs, long shots, RandomStream& rng) {
  if (shots < 1) throw ConfigError("sample_shots: shot count must be at least 1");
  if (probs.size() == 0) throw ConfigError("sample_shots: empty probability vector");
  double total = 0.0;
  std::vector<double> cdf(probs.size());
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    double v = probs[i];
    if (v < -1e-8) throw NumericError("sample_shots: probability below tolerance");
    if (v < 0.0) v = 0.0;
    total += v;
    cdf[static_cast<std::size_t>(i)] = total;
  }
  if (std::abs(total - 1.0) > 1e-8) throw NumericError("sample_shots: probabilities do not sum to 1");
  std::vector<long> counts(static_cast<std::size_t>(probs.size()), 0);
  for (long s = 0; s < shots; ++s) {
    const double u = rng.uniform();
    std::size_t idx = static_cast<std::size_t>(
        std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    if (idx >= counts.size()) idx = counts.size() - 1;
    ++counts[idx];
  }
  return counts;
}

// Projective measurement of one qubit in the Z basis followed by reset to |0>.
// Returns the post-reset state and the observed bit.
inline std::pair<QuantumState, int> measure_and_reset(const QuantumState& state, int qubit,
                                                      RandomStream& rng) {
  if (state.kind != StateKind::Statevector) {
    throw NumericError("measure_and_reset: statevector kind required");
  }
  if (!state.qubit_structured()) throw NumericError("measure_and_reset: no qubit structure");
  const int pos = qubit_bit_position(state.layout.n_qubits, qubit);
  const Eigen::Index mask = Eigen::Index{1} << pos;
  const Eigen::Index d = state.dim();
  double p1 = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (i & mask) p1 += std::norm(state.amplitudes[i]);
  }
  const int bit = rng.bernoulli(p1) ? 1 : 0;
  const double branch = bit ? p1 : 1.0 - p1;
  const double inv = 1.0 / std::sqrt(branch);
  QuantumState out = state;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (i & mask) continue;
    out.amplitudes[i] = (bit ? state.amplitudes[i | mask] : state.amplitudes[i]) * inv;
    out.amplitudes[i | mask] = 0.0;
  }
  return {std::move(out), bit};
}

// Partial trace over one qubit of a density state.
inline QuantumState trace_out_ancilla(const QuantumState& state, int qubit) {
  if (state.kind != StateKind::Density) throw NumericError("trace_out_ancilla: density kind required");
  if (!state.qubit_structured()) throw NumericError("trace_out_ancilla: no qubit structure");
  const int n = state.layout.n_qubits;
  if (n < 2) throw NumericError("trace_out_ancilla: nothing would remain");
  const int pos = qubit_bit_position(n, qubit);
  const Eigen::Index low_mask = (Eigen::Index{1} << pos) - 1;
  const Eigen::Index rd = state.dim() / 2;
  auto insert_bit = [&](Eigen::Index r, Eigen::Index b) {
    return ((r & ~low_mask) << 1) | (b << pos) | (r & low_mask);
  };
  QuantumState out;
  out.kind = StateKind::Density;
  out.layout.n_qubits = n - 1;
  out.rho = ComplexMatrix::Zero(rd, rd);
  for (Eigen::Index i = 0; i < rd; ++i) {
    for (Eigen::Index j = 0; j < rd; ++j) {
      out.rho(i, j) = state.rho(insert_bit(i, 0), insert_bit(j, 0)) +
                      state.rho(insert_bit(i, 1), insert_bit(j, 1));
    }
  }
  return out;
}

}  // namespace enaqt
