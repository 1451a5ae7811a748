#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

// Portable sampling helpers. std::mt19937_64 is fully specified by the
// standard; the library distributions are not, so every draw that ends up in
// an output file goes through these functions instead.
namespace sse::rng {

using Engine = std::mt19937_64;

inline double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n). n must be positive.
inline std::size_t uniform_index(Engine& eng, std::size_t n) {
  auto i = static_cast<std::size_t>(uniform01(eng) * static_cast<double>(n));
  return i < n ? i : n - 1;
}

// Standard normal via Box-Muller; consumes two engine draws per call.
inline double normal(Engine& eng) {
  double u1 = uniform01(eng);
  const double u2 = uniform01(eng);
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// Fisher-Yates permutation of [0, n).
inline std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Engine eng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = uniform_index(eng, i);
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

}  // namespace sse::rng
