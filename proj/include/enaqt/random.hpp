#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace enaqt {

// splitmix64 finalizer; used to derive well-separated seeds from (master, index).
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Deterministic random stream. All distributions are produced from raw
// mt19937_64 output through fixed arithmetic (no std::*_distribution), so a
// given seed yields the same draw sequence on every platform and compiler.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed), id_(seed) {}

  // Independent child stream for trajectory `index` of a run seeded by `master`.
  static RandomStream derived(std::uint64_t master, std::uint64_t index) {
    return RandomStream(mix64(master + 0x9E3779B97F4A7C15ULL * (index + 1)));
  }

  std::uint64_t id() const { return id_; }

  std::uint64_t bits() { return engine_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
  }

  double normal(double stddev) { return stddev * normal(); }

 private:
  std::mt19937_64 engine_;
  std::uint64_t id_ = 0;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// FNV-1a 64-bit hash; used for scenario hashes and output checksums.
inline std::uint64_t fnv1a64(const void* data, std::size_t n) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a64(std::string_view s) { return fnv1a64(s.data(), s.size()); }

}  // namespace enaqt
