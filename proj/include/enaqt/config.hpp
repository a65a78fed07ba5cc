#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "enaqt/errors.hpp"
#include "enaqt/grid.hpp"
#include "enaqt/network.hpp"
#include "enaqt/noise.hpp"
#include "enaqt/random.hpp"

namespace enaqt {

enum class Algorithm { Lindblad, ClassicalNoise, Collision, CollisionAlgorithmic };

inline const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::Lindblad: return "lindblad";
    case Algorithm::ClassicalNoise: return "classical_noise";
    case Algorithm::Collision: return "collision";
    default: return "collision_algorithmic";
  }
}

inline Algorithm algorithm_from_name(std::string_view s) {
  if (s == "lindblad") return Algorithm::Lindblad;
  if (s == "classical_noise") return Algorithm::ClassicalNoise;
  if (s == "collision") return Algorithm::Collision;
  if (s == "collision_algorithmic") return Algorithm::CollisionAlgorithmic;
  throw ConfigError("config: unknown algorithm '" + std::string(s) + "'");
}

inline const char* mapping_name(Mapping m) {
  return m == Mapping::Physical ? "physical" : "algorithmic";
}

inline Mapping mapping_from_name(std::string_view s) {
  if (s == "physical") return Mapping::Physical;
  if (s == "algorithmic") return Mapping::Algorithmic;
  throw ConfigError("config: unknown mapping '" + std::string(s) + "'");
}

// Log-spaced dephasing-rate sweep (rates in units of the hop V). When a grid
// point's rate would leave gamma * delta_tau above `gamma_dt_cap`, the step
// is shrunk for that point (both the stochastic run and its oracle) so the
// per-step collision/noise strength stays perturbative; 0 disables the cap.
struct SweepSpec {
  bool enabled = false;
  double min_gamma = 1e-3;
  double max_gamma = 1e2;
  int points = 16;
  double gamma_dt_cap = 0.08;

  void validate() const {
    if (!enabled) return;
    if (!(min_gamma > 0.0)) throw ConfigError("config: sweep.min must be positive");
    if (!(max_gamma > min_gamma)) throw ConfigError("config: sweep.max must exceed sweep.min");
    if (points < 2) throw ConfigError("config: sweep.points must be >= 2");
    if (gamma_dt_cap < 0.0) throw ConfigError("config: sweep.dt_cap must be >= 0");
  }

  std::vector<double> grid_values() const {
    validate();
    std::vector<double> g;
    const double lo = std::log(min_gamma);
    const double hi = std::log(max_gamma);
    for (int i = 0; i < points; ++i) {
      g.push_back(std::exp(lo + (hi - lo) * static_cast<double>(i) /
                                    static_cast<double>(points - 1)));
    }
    return g;
  }
};

struct ScenarioConfig {
  Algorithm algorithm = Algorithm::Lindblad;
  Mapping mapping = Mapping::Physical;
  ExcitonNetwork network;
  NoiseKind noise_kind = NoiseKind::White;
  double noise_lambda = 0.0;  // OU inverse correlation time
  PropagatorMode propagator = PropagatorMode::Exact;
  SimulationGrid grid;
  ReadoutMode readout = ReadoutMode::ExactProbability;
  long trajectories = 200;
  int source = 1;
  int target = 1;
  SweepSpec sweep;
  std::uint64_t seed = 1;
  std::string out_dir = "out";

  void validate() const {
    network.validate();
    grid.validate();
    sweep.validate();
    const int n = network.site_count();
    if (source < 1 || source > n) throw ConfigError("config: source site out of range");
    if (target < 1 || target > n) throw ConfigError("config: target site out of range");
    if (trajectories < 1) throw ConfigError("config: trajectories must be >= 1");
    if (noise_kind == NoiseKind::OrnsteinUhlenbeck && !(noise_lambda > 0.0)) {
      throw ConfigError("config: noise.lambda must be positive for ou noise");
    }
    if (algorithm == Algorithm::Collision && mapping != Mapping::Physical) {
      throw ConfigError("config: algorithm 'collision' uses the physical mapping");
    }
    if (algorithm == Algorithm::CollisionAlgorithmic && mapping != Mapping::Algorithmic) {
      throw ConfigError("config: algorithm 'collision_algorithmic' uses the algorithmic mapping");
    }
  }

  NoiseConfig noise_config() const {
    if (noise_kind == NoiseKind::White) {
      return NoiseConfig::white_from_rates(network.dephasing_rates);
    }
    return NoiseConfig::ornstein_uhlenbeck(network.dephasing_rates, noise_lambda);
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline double parse_double(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' needs a number, got '" + v + "'");
  }
}

inline long parse_long(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' needs an integer, got '" + v + "'");
  }
}

inline std::uint64_t parse_u64(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return static_cast<std::uint64_t>(x);
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' needs an unsigned integer, got '" + v + "'");
  }
}

inline std::vector<std::string> split(const std::string& v, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : v) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

inline std::vector<double> parse_double_list(const std::string& v, const std::string& key) {
  std::vector<double> out;
  for (const auto& part : split(v, ',')) {
    if (!part.empty()) out.push_back(parse_double(part, key));
  }
  if (out.empty()) throw ConfigError("config: key '" + key + "' needs at least one number");
  return out;
}

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Raw key/value pairs of one config text, in file order.
inline std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> kv;
  std::string line;
  std::istringstream in{std::string(text)};
  while (std::getline(in, line)) {
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: expected 'key = value', got '" + t + "'");
    }
    kv.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return kv;
}

}  // namespace detail

// Parses the key = value scenario format ('#' starts a comment). Topology
// shorthand (network.topology/hop) and static disorder
// (network.disorder_sigma/seed) are expanded at parse time, so serializing
// always yields the explicit network. Unknown keys are errors.
inline ScenarioConfig parse_scenario(std::string_view text) {
  using detail::parse_double;
  using detail::parse_long;
  ScenarioConfig cfg;
  int sites = 0;
  std::vector<double> energies;
  std::vector<double> gammas{0.0};
  std::vector<NetworkEdge> edges;
  std::string topology;
  double hop = 1.0;
  double disorder_sigma = 0.0;
  std::uint64_t disorder_seed = 1;
  double dt = 0.01;
  double horizon = 0.0;
  long steps = 0;
  bool saw_edges = false;

  for (const auto& [key, value] : detail::parse_key_values(text)) {
    if (key == "algorithm") cfg.algorithm = algorithm_from_name(value);
    else if (key == "mapping") cfg.mapping = mapping_from_name(value);
    else if (key == "network.sites") sites = static_cast<int>(parse_long(value, key));
    else if (key == "network.energies") energies = detail::parse_double_list(value, key);
    else if (key == "network.gamma") gammas = detail::parse_double_list(value, key);
    else if (key == "network.topology") topology = value;
    else if (key == "network.hop") hop = parse_double(value, key);
    else if (key == "network.disorder_sigma") disorder_sigma = parse_double(value, key);
    else if (key == "network.disorder_seed") disorder_seed = detail::parse_u64(value, key);
    else if (key == "network.edges") {
      saw_edges = true;
      for (const auto& part : detail::split(value, ',')) {
        if (part.empty()) continue;
        const std::size_t dash = part.find('-');
        if (dash == std::string::npos) {
          throw ConfigError("config: edge '" + part + "' must look like a-b or a-b:V");
        }
        const std::size_t colon = part.find(':', dash);
        NetworkEdge e;
        e.site_a = static_cast<int>(parse_long(detail::trim(part.substr(0, dash)), key));
        const std::string btxt = colon == std::string::npos
                                     ? part.substr(dash + 1)
                                     : part.substr(dash + 1, colon - dash - 1);
        e.site_b = static_cast<int>(parse_long(detail::trim(btxt), key));
        e.coupling = colon == std::string::npos
                         ? 1.0
                         : parse_double(detail::trim(part.substr(colon + 1)), key);
        edges.push_back(e);
      }
    } else if (key == "noise.kind") {
      if (value == "white") cfg.noise_kind = NoiseKind::White;
      else if (value == "ou") cfg.noise_kind = NoiseKind::OrnsteinUhlenbeck;
      else throw ConfigError("config: unknown noise kind '" + value + "'");
    } else if (key == "noise.lambda") cfg.noise_lambda = parse_double(value, key);
    else if (key == "noise.propagator") {
      if (value == "exact") cfg.propagator = PropagatorMode::Exact;
      else if (value == "split") cfg.propagator = PropagatorMode::Split;
      else throw ConfigError("config: unknown propagator mode '" + value + "'");
    } else if (key == "grid.dt") dt = parse_double(value, key);
    else if (key == "grid.horizon") horizon = parse_double(value, key);
    else if (key == "grid.steps") steps = parse_long(value, key);
    else if (key == "grid.shots") cfg.grid.shots_per_point = parse_long(value, key);
    else if (key == "collision.substeps") {
      cfg.grid.trotter_substeps = static_cast<int>(parse_long(value, key));
    } else if (key == "readout") {
      if (value == "exact") cfg.readout = ReadoutMode::ExactProbability;
      else if (value == "single_shot") cfg.readout = ReadoutMode::SingleShot;
      else throw ConfigError("config: unknown readout mode '" + value + "'");
    } else if (key == "trajectories") cfg.trajectories = parse_long(value, key);
    else if (key == "source") cfg.source = static_cast<int>(parse_long(value, key));
    else if (key == "target") cfg.target = static_cast<int>(parse_long(value, key));
    else if (key == "seed") cfg.seed = detail::parse_u64(value, key);
    else if (key == "out") cfg.out_dir = value;
    else if (key == "sweep.min") { cfg.sweep.min_gamma = parse_double(value, key); cfg.sweep.enabled = true; }
    else if (key == "sweep.max") { cfg.sweep.max_gamma = parse_double(value, key); cfg.sweep.enabled = true; }
    else if (key == "sweep.points") { cfg.sweep.points = static_cast<int>(parse_long(value, key)); cfg.sweep.enabled = true; }
    else if (key == "sweep.dt_cap") cfg.sweep.gamma_dt_cap = parse_double(value, key);
    else throw ConfigError("config: unknown key '" + key + "'");
  }

  if (sites == 0 && !energies.empty()) sites = static_cast<int>(energies.size());
  if (sites <= 0) throw ConfigError("config: set network.sites or network.energies");
  if (energies.empty()) energies.assign(static_cast<std::size_t>(sites), 0.0);
  if (static_cast<int>(energies.size()) != sites) {
    throw ConfigError("config: network.energies length must equal network.sites");
  }
  if (!topology.empty()) {
    if (saw_edges) throw ConfigError("config: give network.edges or network.topology, not both");
    const Graph g = topology == "ring"       ? cycle_graph(sites)
                    : topology == "path"     ? path_graph(sites)
                    : topology == "complete" ? complete_graph(sites)
                    : throw ConfigError("config: unknown topology '" + topology + "'");
    for (const auto& [a, b] : g.edges) edges.push_back({a, b, hop});
  }
  if (disorder_sigma > 0.0) {
    RandomStream rng(disorder_seed);
    const std::vector<double> shift = sample_static_disorder(sites, disorder_sigma, rng);
    for (int j = 0; j < sites; ++j) {
      energies[static_cast<std::size_t>(j)] += shift[static_cast<std::size_t>(j)];
    }
  }
  cfg.network.site_energies = std::move(energies);
  cfg.network.edges = std::move(edges);
  if (gammas.size() == 1) gammas.assign(static_cast<std::size_t>(sites), gammas[0]);
  if (static_cast<int>(gammas.size()) != sites) {
    throw ConfigError("config: network.gamma needs 1 or site-count values");
  }
  cfg.network.dephasing_rates = std::move(gammas);

  if (steps > 0) {
    cfg.grid.delta_tau = dt;
    cfg.grid.steps = steps;
    cfg.grid.horizon = dt * static_cast<double>(steps);
  } else {
    const long shots = cfg.grid.shots_per_point;
    const int substeps = cfg.grid.trotter_substeps;
    cfg.grid = SimulationGrid::from_horizon(horizon > 0.0 ? horizon : 40.0, dt);
    cfg.grid.shots_per_point = shots;
    cfg.grid.trotter_substeps = substeps;
  }
  cfg.validate();
  return cfg;
}

inline ScenarioConfig load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

// Canonical explicit form; parse(serialize(cfg)) reproduces cfg exactly.
// The scenario hash covers everything except seed and output directory.
inline std::string serialize_scenario(const ScenarioConfig& cfg, bool include_seed = true) {
  using detail::format_double;
  std::ostringstream out;
  out << "algorithm = " << algorithm_name(cfg.algorithm) << "\n";
  out << "mapping = " << mapping_name(cfg.mapping) << "\n";
  out << "network.sites = " << cfg.network.site_count() << "\n";
  out << "network.energies = ";
  for (std::size_t j = 0; j < cfg.network.site_energies.size(); ++j) {
    out << (j ? "," : "") << format_double(cfg.network.site_energies[j]);
  }
  out << "\n" << "network.edges = ";
  for (std::size_t k = 0; k < cfg.network.edges.size(); ++k) {
    const auto& e = cfg.network.edges[k];
    out << (k ? "," : "") << e.site_a << "-" << e.site_b << ":" << format_double(e.coupling);
  }
  out << "\n" << "network.gamma = ";
  for (std::size_t j = 0; j < cfg.network.dephasing_rates.size(); ++j) {
    out << (j ? "," : "") << format_double(cfg.network.dephasing_rates[j]);
  }
  out << "\n";
  out << "noise.kind = " << (cfg.noise_kind == NoiseKind::White ? "white" : "ou") << "\n";
  if (cfg.noise_kind == NoiseKind::OrnsteinUhlenbeck) {
    out << "noise.lambda = " << format_double(cfg.noise_lambda) << "\n";
  }
  out << "noise.propagator = "
      << (cfg.propagator == PropagatorMode::Exact ? "exact" : "split") << "\n";
  out << "grid.dt = " << format_double(cfg.grid.delta_tau) << "\n";
  out << "grid.steps = " << cfg.grid.steps << "\n";
  out << "grid.shots = " << cfg.grid.shots_per_point << "\n";
  out << "collision.substeps = " << cfg.grid.trotter_substeps << "\n";
  out << "readout = "
      << (cfg.readout == ReadoutMode::ExactProbability ? "exact" : "single_shot") << "\n";
  out << "trajectories = " << cfg.trajectories << "\n";
  out << "source = " << cfg.source << "\n";
  out << "target = " << cfg.target << "\n";
  if (cfg.sweep.enabled) {
    out << "sweep.min = " << format_double(cfg.sweep.min_gamma) << "\n";
    out << "sweep.max = " << format_double(cfg.sweep.max_gamma) << "\n";
    out << "sweep.points = " << cfg.sweep.points << "\n";
    out << "sweep.dt_cap = " << format_double(cfg.sweep.gamma_dt_cap) << "\n";
  }
  if (include_seed) out << "seed = " << cfg.seed << "\n";
  return out.str();
}

inline std::uint64_t scenario_hash(const ScenarioConfig& cfg) {
  return fnv1a64(serialize_scenario(cfg, false));
}

// Master value that per-trajectory streams are derived from: mixes the user
// seed with the scenario hash so distinct scenarios sharing a seed do not
// share trajectory randomness.
inline std::uint64_t ensemble_master(const ScenarioConfig& cfg) {
  return mix64(cfg.seed ^ mix64(scenario_hash(cfg)));
}

}  // namespace enaqt
