#pragma once

#include <utility>
#include <vector>

#include "enaqt/linalg.hpp"

namespace enaqt {

// Undirected simple graph with 1-based node labels and a uniform hop rate.
struct Graph {
  int nodes = 0;
  std::vector<std::pair<int, int>> edges;
  double hop_rate = 1.0;

  void validate() const {
    if (nodes < 1) throw ConfigError("graph: node count must be at least 1");
    if (hop_rate <= 0.0) throw ConfigError("graph: hop rate must be positive");
    for (auto [a, b] : edges) {
      if (a < 1 || a > nodes || b < 1 || b > nodes) {
        throw ConfigError("graph: edge endpoint out of range");
      }
      if (a == b) throw ConfigError("graph: self-loops are not allowed");
    }
    for (std::size_t i = 0; i < edges.size(); ++i) {
      for (std::size_t j = i + 1; j < edges.size(); ++j) {
        const auto [a1, b1] = edges[i];
        const auto [a2, b2] = edges[j];
        if ((a1 == a2 && b1 == b2) || (a1 == b2 && b1 == a2)) {
          throw ConfigError("graph: duplicate edge");
        }
      }
    }
  }

  std::vector<int> degrees() const {
    std::vector<int> deg(static_cast<std::size_t>(nodes), 0);
    for (auto [a, b] : edges) {
      ++deg[static_cast<std::size_t>(a - 1)];
      ++deg[static_cast<std::size_t>(b - 1)];
    }
    return deg;
  }
};

inline Graph cycle_graph(int n, double hop_rate = 1.0) {
  Graph g{n, {}, hop_rate};
  for (int i = 1; i < n; ++i) g.edges.emplace_back(i, i + 1);
  if (n > 2) g.edges.emplace_back(1, n);  // n == 2 collapses onto a single edge
  g.validate();
  return g;
}

inline Graph path_graph(int n, double hop_rate = 1.0) {
  Graph g{n, {}, hop_rate};
  for (int i = 1; i < n; ++i) g.edges.emplace_back(i, i + 1);
  g.validate();
  return g;
}

inline Graph complete_graph(int n, double hop_rate = 1.0) {
  Graph g{n, {}, hop_rate};
  for (int a = 1; a <= n; ++a) {
    for (int b = a + 1; b <= n; ++b) g.edges.emplace_back(a, b);
  }
  g.validate();
  return g;
}

// Combinatorial Laplacian L = D - A.
inline ComplexMatrix laplacian(const Graph& g) {
  g.validate();
  ComplexMatrix l = ComplexMatrix::Zero(g.nodes, g.nodes);
  for (auto [a, b] : g.edges) {
    l(a - 1, b - 1) -= 1.0;
    l(b - 1, a - 1) -= 1.0;
    l(a - 1, a - 1) += 1.0;
    l(b - 1, b - 1) += 1.0;
  }
  return l;
}

// Continuous-time quantum-walk transfer probability |<b| exp(-iHt) |a>|^2
// with H = -hop_rate * L.
inline double qw_probability(const Graph& g, int a, int b, double t) {
  if (a < 1 || a > g.nodes || b < 1 || b > g.nodes) {
    throw ConfigError("qw_probability: node out of range");
  }
  const ComplexMatrix h = -g.hop_rate * laplacian(g);
  const ComplexMatrix u = hermitian_expm(h, t);
  return std::norm(u(b - 1, a - 1));
}

}  // namespace enaqt
