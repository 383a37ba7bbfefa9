#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hermcs/error.hpp"

namespace hermcs {

/// Constant of the closed-form erf approximation used by the threshold rule.
inline constexpr double kErfApproxA = 0.147;

/// erf(x) ≈ sgn(x) √(1 − exp(−x² (4/π + a x²) / (1 + a x²))), a = 0.147.
/// Absolute error below about 1.3e-4.
inline double erf_approx(double x) {
  detail::require(std::isfinite(x), "erf_approx argument must be finite");
  const double x2 = x * x;
  const double a = kErfApproxA;
  const double inner = -x2 * (4.0 / std::numbers::pi + a * x2) / (1.0 + a * x2);
  return std::copysign(std::sqrt(-std::expm1(inner)), x);
}

namespace detail {

// Closed-form inverse of erf_approx, expressed through ln(1 − y²). Used as the
// Newton starting point below.
inline double erfinv_seed_from_log(double log_one_minus_y2) {
  const double a = kErfApproxA;
  const double b = 2.0 / (std::numbers::pi * a) + 0.5 * log_one_minus_y2;
  return std::sqrt(std::sqrt(b * b - log_one_minus_y2 / a) - b);
}

}  // namespace detail

/// Inverse complementary error function for q in (0, 2): erfc(x) = q.
/// Newton iteration on std::erfc, started from the erf_approx inversion.
inline double erfc_inv(double q) {
  detail::require(q > 0.0 && q < 2.0, "erfc_inv argument must lie in (0, 2)");
  if (q == 1.0) return 0.0;
  if (q > 1.0) return -erfc_inv(2.0 - q);
  // y = 1 − q, so 1 − y² = q (2 − q)
  double x = detail::erfinv_seed_from_log(std::log(q) + std::log(2.0 - q));
  const double two_over_sqrt_pi = 2.0 / std::sqrt(std::numbers::pi);
  for (int it = 0; it < 100; ++it) {
    const double f = std::erfc(x) - q;
    const double slope = -two_over_sqrt_pi * std::exp(-x * x);
    if (slope == 0.0) break;
    const double step = f / slope;
    x -= step;
    if (std::abs(step) <= 1e-14 * std::max(1.0, std::abs(x))) return x;
  }
  if (!std::isfinite(x)) throw NumericFailure("erfc_inv failed to converge");
  return x;
}

/// Inverse error function for y in (−1, 1).
inline double erf_inv(double y) {
  detail::require(y > -1.0 && y < 1.0, "erf_inv argument must lie in (-1, 1)");
  if (y == 0.0) return 0.0;
  if (std::abs(y) > 0.5) return std::copysign(erfc_inv(1.0 - std::abs(y)), y);
  double x = std::copysign(detail::erfinv_seed_from_log(std::log1p(-y * y)), y);
  const double two_over_sqrt_pi = 2.0 / std::sqrt(std::numbers::pi);
  for (int it = 0; it < 100; ++it) {
    const double step = (std::erf(x) - y) / (two_over_sqrt_pi * std::exp(-x * x));
    x -= step;
    if (std::abs(step) <= 1e-14 * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

}  // namespace hermcs
