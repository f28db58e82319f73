#pragma once
// Shared helpers for the unit suites: a deterministic uniform source (the
// distribution is hand-rolled so values do not depend on the standard
// library's <random> distribution internals) and small matrix builders.

#include <cstdint>
#include <random>
#include <vector>

#include "tdlab/matrix.hpp"

namespace testutil {

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

inline tdlab::Matrix random_matrix(std::mt19937_64& rng, int rows, int cols,
                                   double lo = -1.0, double hi = 1.0) {
  tdlab::Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = uniform(rng, lo, hi);
  return m;
}

}  // namespace testutil
