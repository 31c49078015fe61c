#pragma once

#include <cmath>
#include <cstdint>

// Counter-based Gaussian draws: the pair of increments for (seed, stream,
// path, step) is a pure function of its key, so simulations are bit-identical
// no matter how paths are scheduled across workers.

namespace periopt::rng {

inline constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Key for one (seed, stream, path, step) cell. Each input is folded through
// the splitmix finalizer so structured indices do not correlate.
inline std::uint64_t cell_key(std::uint64_t seed, std::uint64_t stream,
                              std::uint64_t path, std::uint64_t step) {
  std::uint64_t k = seed + kGamma;
  k = mix64(k ^ (stream + 0x8E1F0B5A2D3C4F6Dull));
  k = mix64(k ^ (path * kGamma + 0xD1B54A32D192ED03ull));
  k = mix64(k ^ (step * 0x94D049BB133111EBull + 1));
  return k;
}

inline double uniform01(std::uint64_t key, std::uint64_t n) {
  // 53-bit mantissa, shifted into (0,1) so log() below is safe
  const std::uint64_t u = mix64(key + n * kGamma);
  return static_cast<double>(u >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

struct GaussPair {
  double z1;
  double z2;
};

// Box-Muller on two counter-derived uniforms.
inline GaussPair gauss_pair(std::uint64_t seed, std::uint64_t stream,
                            std::uint64_t path, std::uint64_t step) {
  const std::uint64_t key = cell_key(seed, stream, path, step);
  const double u1 = uniform01(key, 1);
  const double u2 = uniform01(key, 2);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 6.283185307179586476925286766559 * u2;
  return {r * std::cos(a), r * std::sin(a)};
}

}  // namespace periopt::rng
