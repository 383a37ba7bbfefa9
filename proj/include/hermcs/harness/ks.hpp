#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace hermcs::harness {

/// Kolmogorov–Smirnov distance sup |F_n(x) − F(x)| for samples already sorted ascending.
template <class Cdf>
double ks_statistic_sorted(std::span<const double> sorted, Cdf&& cdf) {
  const auto n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

template <class Cdf>
double ks_statistic(std::vector<double> samples, Cdf&& cdf) {
  std::sort(samples.begin(), samples.end());
  return ks_statistic_sorted(samples, cdf);
}

}  // namespace hermcs::harness
