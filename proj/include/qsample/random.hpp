#pragma once

#include <cstdint>
#include <random>

#include "qsample/quaternion.hpp"

namespace qsample {

/// Uniform in [lo, hi) from the top 53 bits of one draw. Unlike
/// std::uniform_real_distribution the stream is the same on every standard
/// library, which keeps seeded outputs byte-identical across platforms.
inline double uniform(std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

/// Components independently uniform in [lo, hi).
inline Quaternion random_quaternion(std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  const double w = uniform(rng, lo, hi);
  const double x = uniform(rng, lo, hi);
  const double y = uniform(rng, lo, hi);
  const double z = uniform(rng, lo, hi);
  return {w, x, y, z};
}

}  // namespace qsample
