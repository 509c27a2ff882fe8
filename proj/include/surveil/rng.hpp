#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace surveil {

/// splitmix64 step; used to derive independent stream seeds from a base seed
/// plus counters, so parallel fan-out reproduces the sequential result.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t deriveSeed(std::uint64_t base, std::uint64_t counter) {
  return splitmix64(base ^ splitmix64(counter + 0x517cc1b727220a95ULL));
}

inline std::uint64_t deriveSeed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  return deriveSeed(deriveSeed(base, a), b);
}

/// FNV-1a 64-bit. Distinct-count bookkeeping hashes opaque ids through this
/// instead of interning the strings.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::mt19937_64 makeEngine(std::uint64_t seed) {
  return std::mt19937_64{seed};
}

}  // namespace surveil
