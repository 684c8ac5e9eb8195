#pragma once

#include <cmath>
#include <cstdint>

#include "sicspin/constants.hpp"

namespace sicspin::rng {

// Counter-based random streams. Every draw is a pure function of
// (seed, stream, index), so Monte-Carlo shots can be evaluated in any order
// (or in parallel) and still reproduce bit-identical results for a fixed
// seed.

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ (0xD1B54A32D192ED03ull * (b + 1)));
}

// Maps to (0, 1]; never returns 0, so log() below is safe.
inline double to_unit_interval(std::uint64_t x) {
  return static_cast<double>((x >> 11) + 1) * 0x1.0p-53;
}

inline double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return to_unit_interval(hash_combine(hash_combine(seed, stream), index));
}

// Standard normal deviate via Box-Muller.
inline double gaussian(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const std::uint64_t h = hash_combine(hash_combine(seed, stream), index);
  const double u1 = to_unit_interval(h);
  const double u2 = to_unit_interval(mix64(h ^ 0xA0761D6478BD642Full));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * pi * u2);
}

// Compensated (Kahan) accumulator; keeps shot averages order-insensitive
// within floating tolerance.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double v) {
    const double y = v - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

}  // namespace sicspin::rng
