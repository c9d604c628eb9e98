#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace mball {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Uniform in (0, 1) keyed by (seed, draw, component, stream).
inline double counter_uniform(std::uint64_t seed, std::uint64_t draw, std::uint64_t component,
                              std::uint64_t stream = 0) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ draw);
  h = splitmix64(h ^ (component * 2 + stream));
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal keyed by (seed, draw, component), Box-Muller on two
/// independent counter streams.
inline double counter_gaussian(std::uint64_t seed, std::uint64_t draw, std::uint64_t component) {
  const double u1 = counter_uniform(seed, draw, component, 0);
  const double u2 = counter_uniform(seed, draw, component, 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace mball
