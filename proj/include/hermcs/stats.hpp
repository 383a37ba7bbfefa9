#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hermcs/basis.hpp"
#include "hermcs/error.hpp"
#include "hermcs/sampling.hpp"

namespace hermcs {

// Statistics of the zero-filled Hermite coefficients c_p when only M_A of the
// M samples are kept at uniformly random positions.
//
// Non-signal positions: c_p ~ N(0, σ_N²) with
//   σ_N² = (M_A M − M_A²) / (M² (M − 1)) · Σ_l A_l².
// Signal position p_i:   c_p ~ N(A_i M_A / M, σ_i²) with
//   σ_i² = σ_N²(unit) · (A_i² (P_{p_i} / M − 1) + Σ_{l≠i} A_l²),
//   P_p  = Σ_m (ψ_p(t_m)² / ψ_{M−1}(t_m)²)².
// For K = 1 and a fixed mask size this is the exact sampling-without-replacement
// variance of the kept quadrature terms.

/// How the M/M_A amplitude-bias factor enters the mask-based variance estimate.
enum class BiasCompensation {
  /// σ̃² = σ_N²(unit) (M/M_A · P̃/M − 1). Unbiased for the exact variance.
  kEnergyOnly,
  /// σ̃² = M/M_A · σ_N²(unit) (P̃/M − 1). The whole bracket is rescaled, so the
  /// estimate is low by σ_N²(unit)(M/M_A − 1) on average.
  kWholeBracket,
};

struct ComponentMoments {
  int order = 0;
  double amplitude = 0.0;
  double mean = 0.0;      // μ_{s,i} = A_i M_A / M
  double variance = 0.0;  // σ_i²
};

struct ComponentStatistics {
  int M = 0;
  int M_A = 0;
  double noise_variance = 0.0;  // σ_N²
  std::vector<ComponentMoments> components;

  [[nodiscard]] double noise_sigma() const { return std::sqrt(noise_variance); }
};

/// (M_A M − M_A²) / (M² (M − 1)): the noise variance of a unit-amplitude component.
inline double unit_noise_variance(int M, int M_A) {
  detail::require(M >= 2, "noise variance needs M >= 2");
  detail::require(M_A >= 1 && M_A <= M, "M_A must lie in [1, M]");
  const double m = M;
  const double ma = M_A;
  return (ma * m - ma * ma) / (m * m * (m - 1.0));
}

inline double noise_variance(int M, int M_A, std::span<const double> amplitudes) {
  double energy = 0.0;
  for (double a : amplitudes) energy += a * a;
  return unit_noise_variance(M, M_A) * energy;
}

/// P_{p0} = Σ_m (ψ_{p0}²(t_m) / ψ_{M−1}²(t_m))² over all M positions.
inline double component_energy(int p0, const HermiteBasis& basis) {
  detail::require(p0 >= 0 && p0 < basis.order(), "component order out of range");
  const int last = basis.order() - 1;
  double sum = 0.0;
  for (int m = 0; m < basis.order(); ++m) {
    const double r = basis.psi(p0, m) * basis.psi(p0, m) / (basis.psi(last, m) * basis.psi(last, m));
    sum += r * r;
  }
  return sum;
}

/// P̃_{p0}: the same sum restricted to the available positions of `mask`.
inline double component_energy(int p0, const HermiteBasis& basis, const SamplingMask& mask) {
  detail::require(p0 >= 0 && p0 < basis.order(), "component order out of range");
  detail::require(mask.total() == basis.order(), "mask length does not match basis order");
  const int last = basis.order() - 1;
  double sum = 0.0;
  for (int m : mask.available()) {
    const double r = basis.psi(p0, m) * basis.psi(p0, m) / (basis.psi(last, m) * basis.psi(last, m));
    sum += r * r;
  }
  return sum;
}

/// A² σ_N²(unit) (P_{p0}/M − 1), the variance of c_{p0} for a mono-component signal.
inline double signal_variance_exact(int p0, const HermiteBasis& basis, int M_A, double amplitude) {
  const int M = basis.order();
  if (M_A == M) return 0.0;
  const double p = component_energy(p0, basis);
  return amplitude * amplitude * unit_noise_variance(M, M_A) * std::max(p / M - 1.0, 0.0);
}

/// The mask-based variance estimate given P̃ (the energy over the available
/// samples). Negative brackets, possible for unlucky small masks, clamp to zero.
inline double signal_variance_from_energy(double p_tilde, int M, int M_A, double amplitude,
                                          BiasCompensation bias = BiasCompensation::kEnergyOnly) {
  if (M_A == M) return 0.0;
  const double ratio = static_cast<double>(M) / M_A;
  const double bracket = bias == BiasCompensation::kEnergyOnly ? ratio * p_tilde / M - 1.0
                                                               : ratio * (p_tilde / M - 1.0);
  return amplitude * amplitude * unit_noise_variance(M, M_A) * std::max(bracket, 0.0);
}

/// Variance estimate from the available samples only.
inline double signal_variance_estimated(int p0, const HermiteBasis& basis, const SamplingMask& mask,
                                        double amplitude,
                                        BiasCompensation bias = BiasCompensation::kEnergyOnly) {
  const int M = basis.order();
  const int M_A = mask.available_count();
  if (M_A == M) return signal_variance_exact(p0, basis, M_A, amplitude);
  return signal_variance_from_energy(component_energy(p0, basis, mask), M, M_A, amplitude, bias);
}

namespace detail {

inline ComponentStatistics assemble_stats(const SparseSignalSpec& spec, int M, int M_A,
                                          const std::vector<double>& own_variance,
                                          double cross_scale) {
  ComponentStatistics out;
  out.M = M;
  out.M_A = M_A;
  const double unit = unit_noise_variance(M, M_A);
  const double energy = spec.energy();
  out.noise_variance = unit * energy;
  const auto& comps = spec.components();
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const double a = comps[i].amplitude;
    ComponentMoments cm;
    cm.order = comps[i].order;
    cm.amplitude = a;
    cm.mean = a * M_A / static_cast<double>(M);
    cm.variance = own_variance[i] + cross_scale * unit * (energy - a * a);
    out.components.push_back(cm);
  }
  return out;
}

}  // namespace detail

/// Model statistics using the full-grid energies P_{p_i}; no mask needed.
inline ComponentStatistics multi_component_stats(const SparseSignalSpec& spec, const HermiteBasis& basis,
                                                 int M_A) {
  detail::require(spec.length() == basis.order(), "signal spec length does not match basis order");
  std::vector<double> own;
  for (const auto& c : spec.components()) {
    own.push_back(signal_variance_exact(c.order, basis, M_A, c.amplitude));
  }
  return detail::assemble_stats(spec, basis.order(), M_A, own, 1.0);
}

/// Statistics estimated from one mask (energies P̃ over the available samples).
/// With kWholeBracket the cross-component term also carries the M/M_A factor,
/// matching σ_i² = (M − M_A)/(M(M − 1)) (A_i²(P̃/M − 1) + Σ_{l≠i} A_l²).
inline ComponentStatistics multi_component_stats(const SparseSignalSpec& spec, const HermiteBasis& basis,
                                                 const SamplingMask& mask,
                                                 BiasCompensation bias = BiasCompensation::kEnergyOnly) {
  detail::require(spec.length() == basis.order(), "signal spec length does not match basis order");
  detail::require(mask.total() == basis.order(), "mask length does not match basis order");
  const int M = basis.order();
  const int M_A = mask.available_count();
  std::vector<double> own;
  for (const auto& c : spec.components()) {
    own.push_back(signal_variance_estimated(c.order, basis, mask, c.amplitude, bias));
  }
  const double cross = bias == BiasCompensation::kWholeBracket ? static_cast<double>(M) / M_A : 1.0;
  return detail::assemble_stats(spec, M, M_A, own, cross);
}

// Densities of |X| for X ~ N(mean, sigma²).

inline double folded_normal_pdf(double x, double mean, double sigma) {
  detail::require(sigma > 0.0, "folded normal sigma must be positive");
  if (x < 0.0) return 0.0;
  const double two_s2 = 2.0 * sigma * sigma;
  const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
  return norm * (std::exp(-(x - mean) * (x - mean) / two_s2) + std::exp(-(x + mean) * (x + mean) / two_s2));
}

inline double half_normal_pdf(double x, double sigma) {
  detail::require(sigma > 0.0, "half normal sigma must be positive");
  if (x < 0.0) return 0.0;
  return std::sqrt(2.0) / (sigma * std::sqrt(std::numbers::pi)) * std::exp(-x * x / (2.0 * sigma * sigma));
}

inline double folded_normal_cdf(double x, double mean, double sigma) {
  detail::require(sigma > 0.0, "folded normal sigma must be positive");
  if (x <= 0.0) return 0.0;
  const double s = std::sqrt(2.0) * sigma;
  return 0.5 * (std::erf((x + mean) / s) + std::erf((x - mean) / s));
}

/// P(|X| < x) = erf(x / (√2 σ)).
inline double half_normal_cdf(double x, double sigma) {
  detail::require(sigma > 0.0, "half normal sigma must be positive");
  if (x <= 0.0) return 0.0;
  return std::erf(x / (std::sqrt(2.0) * sigma));
}

namespace detail {

// 1 − erf(z)^n for z ≥ 0, without cancellation when erf(z) is close to 1.
inline double one_minus_erf_pow(double z, double n) {
  if (z <= 0.0) return 1.0;
  return -std::expm1(n * std::log1p(-std::erfc(z)));
}

/// Globally adaptive Gauss–Kronrod (21 points) over consecutive breakpoints:
/// the segment with the largest error estimate is bisected until the summed
/// error falls below 1e-13 relative or 1e-16 absolute.
template <class F>
double integrate_global(F&& f, const std::vector<double>& breaks, int max_segments = 4000) {
  using Quad = boost::math::quadrature::gauss_kronrod<double, 21>;
  struct Segment {
    double a, b, value, error;
  };
  auto eval = [&](double a, double b) {
    double err = 0.0;
    const double v = Quad::integrate(f, a, b, 0, 0.0, &err);
    return Segment{a, b, v, err};
  };
  std::vector<Segment> segs;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    if (breaks[k + 1] > breaks[k]) segs.push_back(eval(breaks[k], breaks[k + 1]));
  }
  while (true) {
    double total = 0.0, error = 0.0;
    for (const auto& s : segs) {
      total += s.value;
      error += s.error;
    }
    if (error <= std::max(1e-13 * std::abs(total), 1e-16) || static_cast<int>(segs.size()) >= max_segments) {
      return total;
    }
    auto worst = std::max_element(segs.begin(), segs.end(),
                                  [](const Segment& x, const Segment& y) { return x.error < y.error; });
    const double a = worst->a, b = worst->b, mid = 0.5 * (a + b);
    *worst = eval(a, mid);
    segs.push_back(eval(mid, b));
  }
}

inline void check_component(int index, const ComponentStatistics& stats, int K) {
  require(index >= 0 && index < static_cast<int>(stats.components.size()), "component index out of range");
  require(K >= 1 && K < stats.M, "K must lie in [1, M)");
}

}  // namespace detail

/// Probability that at least one of the M − K noise coefficients exceeds the
/// magnitude of component `index`:
///   ∫₀^∞ (1 − erf(ξ/(√2 σ_N))^{M−K}) f_folded(ξ; μ_i, σ_i) dξ,
/// by adaptive Gauss–Kronrod on [0, μ + 12σ_i].
inline double misdetection_probability_exact(int index, const ComponentStatistics& stats, int K) {
  detail::check_component(index, stats, K);
  const double sigma_n = stats.noise_sigma();
  if (!(sigma_n > 0.0)) return 0.0;
  const auto& c = stats.components[static_cast<std::size_t>(index)];
  const double mu = std::abs(c.mean);
  const double n = static_cast<double>(stats.M - K);
  const double scale = 1.0 / (std::sqrt(2.0) * sigma_n);
  const double sigma_i = std::sqrt(std::max(c.variance, 0.0));
  if (!(sigma_i > 0.0)) {
    return std::clamp(detail::one_minus_erf_pow(mu * scale, n), 0.0, 1.0);
  }

  auto integrand = [&](double xi) {
    return detail::one_minus_erf_pow(xi * scale, n) * folded_normal_pdf(xi, mu, sigma_i);
  };

  const double upper = mu + 12.0 * sigma_i;
  std::vector<double> breaks{0.0, upper};
  for (double k : {-6.0, -3.0, 0.0, 3.0, 6.0}) breaks.push_back(mu + k * sigma_i);
  for (double k : {2.0, 3.0, 4.0, 5.0, 6.0}) breaks.push_back(k * sigma_n);
  std::erase_if(breaks, [&](double b) { return b < 0.0 || b > upper; });
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  const double total = detail::integrate_global(integrand, breaks);
  if (!std::isfinite(total)) throw NumericFailure("misdetection integral is not finite");
  return std::clamp(total, 0.0, 1.0);
}

/// 1 − erf((μ_i − correction·σ_i) / (√2 σ_N))^{M−K}. correction = 0 treats the
/// component as deterministic at its mean.
inline double misdetection_probability_approx(int index, const ComponentStatistics& stats, int K,
                                              double correction = 1.5) {
  detail::check_component(index, stats, K);
  const double sigma_n = stats.noise_sigma();
  if (!(sigma_n > 0.0)) return 0.0;
  const auto& c = stats.components[static_cast<std::size_t>(index)];
  const double arg = (std::abs(c.mean) - correction * std::sqrt(std::max(c.variance, 0.0))) /
                     (std::sqrt(2.0) * sigma_n);
  const double n = static_cast<double>(stats.M - K);
  const double p = arg >= 0.0 ? detail::one_minus_erf_pow(arg, n) : 1.0 - std::pow(std::erf(arg), n);
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace hermcs
