#pragma once

// Test-only oracles and generators. Everything here is deliberately
// independent of the library's LP solve path.

#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "ddalpha/matrix.hpp"
#include "ddalpha/rng.hpp"

namespace oracle {

// Exact zonoid depth for tiny instances (d <= 2) by brute force over the
// vertex supports of { p : sum_i p_i (x_i - target) = 0, 0 <= p_i <= 1/n }:
// at a vertex at most d coordinates are strictly between their bounds, the
// rest sit at 0 or 1/n. Returns the max of sum p over all feasible
// candidates, which is 0 exactly when the target lies outside the hull.
inline double zonoid_depth_bruteforce(const ddalpha::Matrix& pts, std::span<const double> x) {
  const std::size_t n = pts.rows;
  const std::size_t d = pts.cols;
  const double ub = 1.0 / double(n);

  std::vector<double> c(n * d);
  double scale = 1.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k) {
      c[i * d + k] = pts(i, k) - x[k];
      scale = std::max(scale, std::abs(c[i * d + k]));
    }
  const double eq_tol = 1e-9 * scale;

  double best = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << n); ++mask) {
    double base[2] = {0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (std::uint64_t(1) << i))
        for (std::size_t k = 0; k < d; ++k) base[k] += c[i * d + k] * ub;
    const double at_upper = double(std::popcount(mask)) * ub;

    // no fractional coordinate
    bool zero = true;
    for (std::size_t k = 0; k < d; ++k)
      if (std::abs(base[k]) > eq_tol) zero = false;
    if (zero) best = std::max(best, at_upper);

    // one fractional coordinate: c_i * p = -base in least squares
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::uint64_t(1) << i)) continue;
      double cc = 0.0, cb = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        cc += c[i * d + k] * c[i * d + k];
        cb += c[i * d + k] * base[k];
      }
      if (cc <= 1e-18) continue;
      const double p = -cb / cc;
      if (p < -1e-12 || p > ub + 1e-12) continue;
      bool ok = true;
      for (std::size_t k = 0; k < d; ++k)
        if (std::abs(base[k] + c[i * d + k] * p) > eq_tol) ok = false;
      if (ok) best = std::max(best, at_upper + std::clamp(p, 0.0, ub));
    }

    // two fractional coordinates (d == 2)
    if (d == 2) {
      for (std::size_t i = 0; i < n; ++i) {
        if (mask & (std::uint64_t(1) << i)) continue;
        for (std::size_t j = i + 1; j < n; ++j) {
          if (mask & (std::uint64_t(1) << j)) continue;
          const double a11 = c[i * d], a21 = c[i * d + 1];
          const double a12 = c[j * d], a22 = c[j * d + 1];
          const double det = a11 * a22 - a12 * a21;
          if (std::abs(det) <= 1e-12 * scale * scale) continue;
          const double pi = (-base[0] * a22 + base[1] * a12) / det;
          const double pj = (-a11 * base[1] + a21 * base[0]) / det;
          if (pi < -1e-12 || pi > ub + 1e-12) continue;
          if (pj < -1e-12 || pj > ub + 1e-12) continue;
          best = std::max(best, at_upper + std::clamp(pi, 0.0, ub) + std::clamp(pj, 0.0, ub));
        }
      }
    }
  }
  return std::min(best, 1.0);
}

inline ddalpha::Matrix random_points(ddalpha::RandomStream& stream, std::size_t n, std::size_t d,
                                     double lo = -1.0, double hi = 1.0) {
  ddalpha::Matrix m(n, d);
  for (auto& v : m.data) v = stream.uniform(lo, hi);
  return m;
}

}  // namespace oracle
