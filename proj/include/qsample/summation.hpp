#pragma once

#include <cstddef>
#include <span>

#include "qsample/quaternion.hpp"

namespace qsample {

/// Pairwise (cascade) summation. The split points depend only on the length,
/// so the rounding pattern is reproducible for a given input order.
template <class T>
T pairwise_sum(std::span<const T> v) {
  if (v.size() <= 8) {
    T acc{};
    for (const auto& x : v) acc += x;
    return acc;
  }
  const std::size_t half = v.size() / 2;
  T a = pairwise_sum(v.first(half));
  a += pairwise_sum(v.subspan(half));
  return a;
}

}  // namespace qsample
