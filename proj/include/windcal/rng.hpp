#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "windcal/normal.hpp"

namespace windcal {

// Deterministic random stream. All variates are derived from raw 64-bit
// draws so sequences are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix(seed)) {}

  // Derive an independent sub-stream from a master seed and a key path.
  static Rng substream(std::uint64_t master, std::uint64_t k1, std::uint64_t k2 = 0,
                       std::uint64_t k3 = 0) {
    std::uint64_t s = splitmix(master);
    s = splitmix(s ^ (0x9e3779b97f4a7c15ull + k1));
    s = splitmix(s ^ (0xbf58476d1ce4e5b9ull + k2));
    s = splitmix(s ^ (0x94d049bb133111ebull + k3));
    return Rng(s);
  }

  std::uint64_t raw() { return engine_(); }

  // Uniform on the open interval (0,1).
  double uniform() { return (static_cast<double>(raw() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() { return norm_quantile(uniform()); }

  std::size_t uniform_index(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
  }

  // Geometric block length on {1, 2, ...} with the given mean (>= 1).
  int geometric(double mean) {
    if (mean <= 1.0) return 1;
    double p = 1.0 / mean;
    return 1 + static_cast<int>(std::log(uniform()) / std::log1p(-p));
  }

 private:
  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace windcal
