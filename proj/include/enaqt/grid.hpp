#pragma once

#include <cmath>

#include "enaqt/errors.hpp"

namespace enaqt {

// Shared discretization for every propagation backend: S steps of size
// delta_tau covering horizon T = S * delta_tau exactly.
struct SimulationGrid {
  double delta_tau = 0.01;
  long steps = 0;
  double horizon = 0.0;
  long trajectories = 1;     // ensemble size
  long shots_per_point = 1;  // repeated basis measurements per sample
  int trotter_substeps = 1;  // m substeps per evolution block

  static SimulationGrid from_horizon(double horizon, double delta_tau) {
    if (delta_tau <= 0.0) throw ConfigError("grid: delta_tau must be positive");
    if (horizon <= 0.0) throw ConfigError("grid: horizon must be positive");
    SimulationGrid g;
    g.delta_tau = delta_tau;
    g.steps = std::lround(horizon / delta_tau);
    if (g.steps < 1 || std::abs(g.steps * delta_tau - horizon) > 1e-9 * std::max(horizon, 1.0)) {
      throw ConfigError("grid: horizon must be an integer multiple of delta_tau");
    }
    g.horizon = g.steps * delta_tau;
    return g;
  }

  void validate() const {
    if (delta_tau <= 0.0) throw ConfigError("grid: delta_tau must be positive");
    if (steps < 1) throw ConfigError("grid: step count must be at least 1");
    if (trajectories < 1) throw ConfigError("grid: trajectory count must be at least 1");
    if (shots_per_point < 1) throw ConfigError("grid: shot count must be at least 1");
    if (trotter_substeps < 1) throw ConfigError("grid: substep count must be at least 1");
  }
};

}  // namespace enaqt
