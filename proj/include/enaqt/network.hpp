#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "enaqt/graph.hpp"
#include "enaqt/linalg.hpp"
#include "enaqt/random.hpp"

namespace enaqt {

// How sites are laid out on qubits. Physical: one qubit per site, site j
// occupied == qubit j set. Algorithmic: site j stored as binary index j-1 on
// ceil(log2 N) qubits.
enum class Mapping { Physical, Algorithmic };

struct NetworkEdge {
  int site_a = 0;  // 1-based, site_a < site_b
  int site_b = 0;
  double coupling = 0.0;  // V_ab
};

// Tight-binding exciton network: site energies, symmetric hopping couplings
// on the listed edges, and a per-site dephasing rate gamma_j >= 0.
struct ExcitonNetwork {
  std::vector<double> site_energies;
  std::vector<NetworkEdge> edges;
  std::vector<double> dephasing_rates;

  int site_count() const { return static_cast<int>(site_energies.size()); }

  void validate() const {
    const int n = site_count();
    if (n < 1) throw ConfigError("network: at least one site required");
    if (dephasing_rates.size() != site_energies.size()) {
      throw ConfigError("network: dephasing_rates size must match site count");
    }
    for (double g : dephasing_rates) {
      if (!(g >= 0.0)) throw ConfigError("network: dephasing rates must be >= 0");
    }
    for (const auto& e : edges) {
      if (e.site_a < 1 || e.site_b < 1 || e.site_a > n || e.site_b > n) {
        throw ConfigError("network: edge endpoint out of range");
      }
      if (e.site_a >= e.site_b) throw ConfigError("network: edges must satisfy site_a < site_b");
    }
    for (std::size_t i = 0; i < edges.size(); ++i) {
      for (std::size_t j = i + 1; j < edges.size(); ++j) {
        if (edges[i].site_a == edges[j].site_a && edges[i].site_b == edges[j].site_b) {
          throw ConfigError("network: duplicate edge");
        }
      }
    }
  }
};

inline int algorithmic_qubits(int n_sites) {
  int q = 0;
  while ((1 << q) < n_sites) ++q;
  return q;
}

// Occupied-site basis index under the physical mapping: site j -> the
// Hamming-weight-1 string with qubit j set, i.e. index 2^(N-j).
inline Eigen::Index encode_physical(int site, int n_sites) {
  if (site < 1 || site > n_sites) throw ConfigError("encode_physical: site out of range");
  return Eigen::Index{1} << (n_sites - site);
}

// Binary-register index under the algorithmic mapping: site j -> j-1.
inline Eigen::Index encode_algorithmic(int site, int n_sites) {
  if (site < 1 || site > n_sites) throw ConfigError("encode_algorithmic: site out of range");
  return site - 1;
}

// Single-exciton Hamiltonian in the site basis: H(j,j) = eps_j,
// H(j,j') = V_jj' on edges.
inline ComplexMatrix site_hamiltonian(const ExcitonNetwork& net) {
  net.validate();
  const int n = net.site_count();
  ComplexMatrix h = ComplexMatrix::Zero(n, n);
  for (int j = 0; j < n; ++j) h(j, j) = net.site_energies[static_cast<std::size_t>(j)];
  for (const auto& e : net.edges) {
    h(e.site_a - 1, e.site_b - 1) = e.coupling;
    h(e.site_b - 1, e.site_a - 1) = e.coupling;
  }
  return h;
}

// Static Gaussian site disorder: n independent draws from N(0, sigma^2),
// site-major order.
inline std::vector<double> sample_static_disorder(int n, double sigma, RandomStream& rng) {
  if (n < 1) throw ConfigError("sample_static_disorder: need at least one site");
  if (sigma < 0.0) throw ConfigError("sample_static_disorder: sigma must be >= 0");
  std::vector<double> eps(static_cast<std::size_t>(n));
  for (auto& e : eps) e = rng.normal(sigma);
  return eps;
}

// Ring of N sites with uniform nearest-neighbour coupling and uniform
// dephasing rate.
inline ExcitonNetwork ring_network(std::vector<double> energies, double coupling, double gamma) {
  ExcitonNetwork net;
  const int n = static_cast<int>(energies.size());
  net.site_energies = std::move(energies);
  net.dephasing_rates.assign(static_cast<std::size_t>(n), gamma);
  for (int i = 1; i < n; ++i) net.edges.push_back({i, i + 1, coupling});
  if (n > 2) net.edges.push_back({1, n, coupling});
  net.validate();
  return net;
}

// Canonical four-site demo ring: a frozen Gaussian disorder draw (sigma = 2V)
// on unit-coupling ring, used throughout the tests and sample configs.
inline ExcitonNetwork ring4_disordered(double gamma) {
  return ring_network({0.44, 0.24, -3.22, 0.36}, 1.0, gamma);
}

// Network built from a plain graph: uniform coupling = hop_rate, site
// energies = -hop_rate * degree, so the site Hamiltonian equals -hop_rate * L.
inline ExcitonNetwork network_from_graph(const Graph& g, double gamma) {
  g.validate();
  ExcitonNetwork net;
  const auto deg = g.degrees();
  net.site_energies.resize(static_cast<std::size_t>(g.nodes));
  for (int j = 0; j < g.nodes; ++j) {
    net.site_energies[static_cast<std::size_t>(j)] = -g.hop_rate * deg[static_cast<std::size_t>(j)];
  }
  net.dephasing_rates.assign(static_cast<std::size_t>(g.nodes), gamma);
  for (auto [a, b] : g.edges) {
    net.edges.push_back({std::min(a, b), std::max(a, b), g.hop_rate});
  }
  net.validate();
  return net;
}

// Copy of a network with every dephasing rate replaced by `gamma`.
inline ExcitonNetwork with_uniform_dephasing(const ExcitonNetwork& net, double gamma) {
  ExcitonNetwork out = net;
  out.dephasing_rates.assign(out.dephasing_rates.size(), gamma);
  return out;
}

}  // namespace enaqt
