#pragma once

#include <cstdint>

namespace sigimg {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Stateless 64-bit hash of (seed, a, b, c). Draws keyed this way do not
/// depend on the order in which they are requested.
inline std::uint64_t keyed_bits(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t z = detail::splitmix64(seed);
  z = detail::splitmix64(z ^ a);
  z = detail::splitmix64(z ^ b);
  return detail::splitmix64(z ^ c);
}

/// Uniform [0, 1) from keyed_bits.
inline double keyed_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return static_cast<double>(keyed_bits(seed, a, b, c) >> 11) * 0x1.0p-53;
}

}  // namespace sigimg
