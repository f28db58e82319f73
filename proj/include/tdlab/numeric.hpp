#pragma once
// Shared numeric policy. Every tolerance used for classification or comparison
// lives here so the whole artifact agrees on what "equal", "marginal" and
// "blown up" mean.

#include <cmath>
#include <cstddef>
#include <vector>

namespace tdlab {

struct NumericPolicy {
  double entrywise_tol = 1e-10;  // matrix / vector entry comparisons
  double spectral_tol = 1e-10;   // eigenvalue accuracy target
  double marginal_band = 1e-9;   // |rho - 1| below this is "marginal"
  double blowup_bound = 1e8;     // sup-norm cutoff for trajectory divergence
};

inline const NumericPolicy& numeric_policy() {
  static const NumericPolicy p;
  return p;
}

inline bool nearly_equal(double a, double b, double tol) {
  return std::abs(a - b) <= tol;
}

// Absolute-or-relative closeness, for quantities of unknown scale.
inline bool close_abs_rel(double a, double b, double tol) {
  double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= tol * scale;
}

inline bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace tdlab
