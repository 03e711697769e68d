#pragma once

// Random streams shared by every stochastic component.
//
// Every function that consumes randomness takes an Rng& owned by the caller.
// Independent streams (per chain, per replication) are derived from a base
// seed and a stream index, so results never depend on execution order.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace seasonsim {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed for stream `stream` under `base_seed`. Distinct (base, stream) pairs
// map to well-separated seeds.
constexpr std::uint64_t derive_seed(std::uint64_t base_seed,
                                    std::uint64_t stream) noexcept {
  return mix64(mix64(base_seed) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

inline Rng make_stream(std::uint64_t base_seed, std::uint64_t stream) {
  return Rng{derive_seed(base_seed, stream)};
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>{0.0, 1.0}(rng);
}

inline double normal(Rng& rng, double mean, double sd) {
  if (sd == 0.0) return mean;
  return std::normal_distribution<double>{mean, sd}(rng);
}

// Beta(a, b) via the ratio of two gamma variates.
inline double beta_draw(Rng& rng, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
    throw std::domain_error("beta_draw: shape parameters must be positive and finite");
  std::gamma_distribution<double> ga{a, 1.0};
  std::gamma_distribution<double> gb{b, 1.0};
  for (;;) {
    const double x = ga(rng);
    const double y = gb(rng);
    const double s = x + y;
    if (s > 0.0 && std::isfinite(s)) return x / s;
  }
}

// Uniform index in [0, n).
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: empty range");
  return std::uniform_int_distribution<std::size_t>{0, n - 1}(rng);
}

}  // namespace seasonsim
