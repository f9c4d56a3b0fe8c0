#pragma once

#include <array>
#include <cmath>
#include <functional>

#include "swsr/errors.hpp"

namespace swsr {

constexpr int kRombergMaxLevels = 20;

/// Romberg integration of f over [lo, hi]: trapezoid refinement with
/// Richardson extrapolation, stopping when successive diagonal entries
/// agree to `rel_tol` (relative to the current estimate). Throws
/// QuadratureError with the last two estimates on non-convergence.
template <typename F>
double romberg(F&& f, double lo, double hi, double rel_tol = 1e-10) {
  if (lo > hi) throw ConfigError("romberg: lo > hi");
  if (lo == hi) return 0.0;

  std::array<double, kRombergMaxLevels> row{};
  const double h0 = hi - lo;
  row[0] = 0.5 * h0 * (f(lo) + f(hi));
  double prev_diag = row[0];

  for (int k = 1; k < kRombergMaxLevels; ++k) {
    const long n_new = 1L << (k - 1);  // midpoints added at this level
    const double h = h0 / static_cast<double>(1L << k);
    double mids = 0.0;
    for (long m = 0; m < n_new; ++m) mids += f(lo + (2 * m + 1) * h);
    double cur = 0.5 * row[0] + h * mids;

    // Richardson extrapolation along the current table row.
    double pow4 = 1.0;
    for (int q = 1; q <= k; ++q) {
      pow4 *= 4.0;
      double tmp = (pow4 * cur - row[q - 1]) / (pow4 - 1.0);
      row[q - 1] = cur;
      cur = tmp;
    }
    const double diag = cur;
    row[k] = diag;

    if (k >= 2) {
      const double scale = std::max(std::abs(diag), std::abs(prev_diag));
      if (std::abs(diag - prev_diag) <= rel_tol * std::max(scale, 1e-300)) return diag;
    }
    prev_diag = diag;
  }
  throw QuadratureError("romberg: no convergence after max levels", row[kRombergMaxLevels - 1],
                        row[kRombergMaxLevels - 2]);
}

}  // namespace swsr
