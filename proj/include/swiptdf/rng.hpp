#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

// Deterministic substream RNG: trial i of a campaign draws from an engine
// seeded purely by (seed, i), so results do not depend on trial order or
// thread count. Gaussians use an explicit Box-Muller so the byte stream is
// independent of the standard library's distribution implementations.

namespace swiptdf {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// mt19937_64 seeded from a splitmix64 hash of (seed, stream).
inline std::mt19937_64 substream_engine(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t state = seed;
  std::uint64_t mixed = splitmix64(state);
  state ^= stream * 0xD1342543DE82EF95ull + 0x2545F4914F6CDD1Dull;
  mixed ^= splitmix64(state);
  return std::mt19937_64(mixed);
}

/// Uniform draw in (0, 1], 53-bit resolution.
inline double uniform01(std::mt19937_64& eng) {
  return static_cast<double>((eng() >> 11) + 1) * 0x1.0p-53;
}

/// One standard normal pair (Box-Muller).
inline std::pair<double, double> normal_pair(std::mt19937_64& eng) {
  const double u1 = uniform01(eng);
  const double u2 = uniform01(eng);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(angle), r * std::sin(angle)};
}

inline constexpr const char* kRngName = "mt19937_64/splitmix64-substreams+box-muller";

}  // namespace swiptdf
