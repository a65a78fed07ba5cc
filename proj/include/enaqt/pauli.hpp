#pragma once

#include <vector>

#include "enaqt/linalg.hpp"
#include "enaqt/network.hpp"
#include "enaqt/state.hpp"

namespace enaqt {

enum class PauliAxis { X, Y, Z };

struct PauliFactor {
  int qubit = 0;  // 1-based
  PauliAxis axis = PauliAxis::Z;
};

// coefficient * product of single-qubit Pauli factors (identity elsewhere).
struct PauliTerm {
  double coefficient = 0.0;
  std::vector<PauliFactor> factors;
};

inline const ComplexMatrix& pauli_matrix(PauliAxis axis) {
  static const ComplexMatrix x = pauli_x();
  static const ComplexMatrix y = pauli_y();
  static const ComplexMatrix z = pauli_z();
  switch (axis) {
    case PauliAxis::X: return x;
    case PauliAxis::Y: return y;
    default: return z;
  }
}

inline ComplexMatrix pauli_term_matrix(const PauliTerm& term, int n_qubits) {
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (int q = 1; q <= n_qubits; ++q) {
    const ComplexMatrix* factor = nullptr;
    for (const auto& f : term.factors) {
      if (f.qubit == q) {
        if (factor) throw ConfigError("pauli term: duplicate qubit in factor list");
        factor = &pauli_matrix(f.axis);
      }
    }
    out = kron(out, factor ? *factor : ComplexMatrix::Identity(2, 2));
  }
  for (const auto& f : term.factors) {
    if (f.qubit < 1 || f.qubit > n_qubits) throw ConfigError("pauli term: qubit out of range");
  }
  return term.coefficient * out;
}

inline ComplexMatrix assemble_pauli_terms(const std::vector<PauliTerm>& terms, int n_qubits) {
  const Eigen::Index d = Eigen::Index{1} << n_qubits;
  ComplexMatrix h = ComplexMatrix::Zero(d, d);
  for (const auto& t : terms) h += pauli_term_matrix(t, n_qubits);
  return h;
}

// One-qubit-per-site Hamiltonian equivalent to the site Hamiltonian on the
// single-excitation manifold (up to the constant -1/2 sum(eps)):
//   -sum_j (eps_j/2) Z_j + sum_edges (V/2)(X_j X_j' + Y_j Y_j').
// Zero-coefficient terms are kept so the term list always has the same shape
// for a given network topology.
inline std::vector<PauliTerm> qubit_hamiltonian(const ExcitonNetwork& net) {
  net.validate();
  std::vector<PauliTerm> terms;
  const int n = net.site_count();
  for (int j = 1; j <= n; ++j) {
    terms.push_back({-0.5 * net.site_energies[static_cast<std::size_t>(j - 1)],
                     {{j, PauliAxis::Z}}});
  }
  for (const auto& e : net.edges) {
    terms.push_back({0.5 * e.coupling, {{e.site_a, PauliAxis::X}, {e.site_b, PauliAxis::X}}});
    terms.push_back({0.5 * e.coupling, {{e.site_a, PauliAxis::Y}, {e.site_b, PauliAxis::Y}}});
  }
  return terms;
}

// Energy offset by which the qubit Hamiltonian, restricted to the
// single-excitation manifold, differs from the site Hamiltonian:
// H_qubit|manifold = H_site + offset * I.
inline double qubit_hamiltonian_offset(const ExcitonNetwork& net) {
  double sum = 0.0;
  for (double e : net.site_energies) sum += e;
  return -0.5 * sum;
}

}  // namespace enaqt
