#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "hermcs/basis.hpp"
#include "hermcs/error.hpp"
#include "hermcs/sampling.hpp"
#include "hermcs/special.hpp"
#include "hermcs/stats.hpp"
#include "hermcs/transform.hpp"

namespace hermcs {

/// Inputs of the detection threshold: T is chosen so that all noise
/// coefficients stay below it with probability target_probability.
struct ThresholdSpec {
  double target_probability = 0.99;  // P_NN(T)
  int M = 0;
  int K_hint = 0;  // 0: exponent 1/M (K neglected), otherwise 1/(M − K)
  double sigma_N = 0.0;
};

namespace detail {

inline int threshold_exponent(const ThresholdSpec& spec) {
  require(spec.target_probability > 0.0 && spec.target_probability < 1.0,
          "target probability must lie in (0, 1)");
  require(spec.sigma_N >= 0.0 && std::isfinite(spec.sigma_N), "sigma_N must be finite and non-negative");
  require(spec.K_hint >= 0 && spec.M - spec.K_hint >= 1, "need M − K >= 1");
  return spec.M - spec.K_hint;
}

}  // namespace detail

/// T = √2 σ_N erf⁻¹(P_NN^{1/(M−K)}) with a Newton-refined inverse erf.
inline double threshold_exact(const ThresholdSpec& spec) {
  const int n = detail::threshold_exponent(spec);
  if (spec.sigma_N == 0.0) return 0.0;
  // 1 − P^{1/n}, kept accurate for P^{1/n} → 1
  const double q = -std::expm1(std::log(spec.target_probability) / n);
  return std::sqrt(2.0) * spec.sigma_N * erfc_inv(q);
}

/// Closed-form threshold from inverting erf_approx:
///   L = log(1 − P_NN^{2/(M−K)}),
///   T = σ_N √((−4/π − aL + √((4/π + aL)² − 4aL)) / a),  a = 0.147.
inline double threshold_closed_form(const ThresholdSpec& spec) {
  const int n = detail::threshold_exponent(spec);
  if (spec.sigma_N == 0.0) return 0.0;
  const double a = kErfApproxA;
  const double L = std::log(-std::expm1(2.0 * std::log(spec.target_probability) / n));
  const double b = 4.0 / std::numbers::pi + a * L;
  return spec.sigma_N * std::sqrt((-b + std::sqrt(b * b - 4.0 * a * L)) / a);
}

/// σ_N from the zero-filled coefficients: the signal energy is estimated as
/// (M/M_A) Σ_p c_p² and plugged into the multicomponent noise variance.
/// The zero-filled signal coefficients shrink by M_A/M while the noise energy
/// is counted in; the two nearly cancel, so σ̂² is close to unbiased.
inline double estimate_sigma_from_coefficients(const CoefficientVector& c0, int M, int M_A) {
  detail::require(M_A >= 1 && M_A <= M, "M_A must lie in [1, M]");
  if (M_A == M) return 0.0;
  const double energy = static_cast<double>(M) / M_A * c0.values().squaredNorm();
  return std::sqrt(unit_noise_variance(M, M_A) * energy);
}

/// Positions p with |c_p| > threshold, ascending. A zero threshold keeps the
/// coefficients above 1e-12 · max|c|.
inline std::vector<int> detect_support(const CoefficientVector& c0, double threshold) {
  std::vector<int> support;
  const Eigen::VectorXd& c = c0.values();
  double level = threshold;
  if (threshold == 0.0) {
    level = c.size() > 0 ? 1e-12 * c.cwiseAbs().maxCoeff() : 0.0;
  }
  for (int p = 0; p < c.size(); ++p) {
    if (std::abs(c(p)) > level) support.push_back(p);
  }
  return support;
}

enum class ReconstructionStatus { kOk, kEmptySupport, kSupportExceedsMeasurements };

inline std::string_view to_string(ReconstructionStatus s) {
  switch (s) {
    case ReconstructionStatus::kOk:
      return "ok";
    case ReconstructionStatus::kEmptySupport:
      return "empty-support";
    case ReconstructionStatus::kSupportExceedsMeasurements:
      return "support-exceeds-measurements";
  }
  return "unknown";
}

struct ReconstructionResult {
  std::vector<int> support;              // detected orders, ascending
  Eigen::VectorXd coefficients;          // c_K aligned with support
  CoefficientVector full_coefficients;   // zeros off the support
  SampleVector reconstructed_signal;
  double residual_norm = 0.0;            // ‖y_cs − A_csK c_K‖₂
  double threshold_used = 0.0;
  double sigma_estimate = 0.0;
  double condition_estimate = 0.0;       // σ_max / σ_min of A_csK (∞ if singular)
  bool rank_deficient = false;           // minimum-norm solution was returned
  ReconstructionStatus status = ReconstructionStatus::kOk;
};

/// Rows of the inverse transform at the available positions, restricted to
/// the given orders: A(i, j) = ψ_{support[j]}(t_{mask[i]}).
inline Eigen::MatrixXd measurement_matrix(const HermiteBasis& basis, const SamplingMask& mask,
                                          const std::vector<int>& support) {
  Eigen::MatrixXd a(mask.available_count(), static_cast<Eigen::Index>(support.size()));
  for (int i = 0; i < mask.available_count(); ++i) {
    const int m = mask.available()[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < support.size(); ++j) a(i, static_cast<Eigen::Index>(j)) = basis.psi(support[j], m);
  }
  return a;
}

/// Least-squares fit of the measurement on the given support,
/// min ‖A_csK c − y_cs‖₂, via a complete orthogonal decomposition.
inline ReconstructionResult reconstruct_on_support(const Measurement& meas, const HermiteBasis& basis,
                                                   std::vector<int> support) {
  detail::require(meas.mask.total() == basis.order(), "mask length does not match basis order");
  detail::require(meas.values.size() == meas.mask.available_count(), "measurement length does not match its mask");
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());
  for (int p : support) detail::require(p >= 0 && p < basis.order(), "support order out of range");

  const int M = basis.order();
  ReconstructionResult out;
  out.support = support;
  out.full_coefficients = CoefficientVector::zeros(M);
  out.reconstructed_signal = SampleVector::zeros(M);
  out.residual_norm = meas.values.norm();
  if (support.empty()) {
    out.status = ReconstructionStatus::kEmptySupport;
    return out;
  }
  if (static_cast<int>(support.size()) > meas.mask.available_count()) {
    out.status = ReconstructionStatus::kSupportExceedsMeasurements;
    return out;
  }

  const Eigen::MatrixXd a = measurement_matrix(basis, meas.mask, support);
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  out.coefficients = cod.solve(meas.values);
  out.rank_deficient = cod.rank() < a.cols();

  const Eigen::VectorXd sv = Eigen::BDCSVD<Eigen::MatrixXd>(a).singularValues();
  const double smin = sv(sv.size() - 1);
  out.condition_estimate = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();

  Eigen::VectorXd full = Eigen::VectorXd::Zero(M);
  for (std::size_t j = 0; j < support.size(); ++j) full(support[j]) = out.coefficients(static_cast<Eigen::Index>(j));
  out.full_coefficients = CoefficientVector(full);
  out.reconstructed_signal = inverse(out.full_coefficients, basis);
  out.residual_norm = (meas.values - a * out.coefficients).norm();
  return out;
}

/// Single-pass threshold reconstruction:
/// zero-filled coefficients → σ_N estimate → closed-form threshold → support
/// → least squares on the support.
inline ReconstructionResult reconstruct(const Measurement& meas, const HermiteBasis& basis, double p_nn = 0.99) {
  const int M = basis.order();
  const int M_A = meas.mask.available_count();
  const CoefficientVector c0 = initial_estimate(meas, basis);
  const double sigma = estimate_sigma_from_coefficients(c0, M, M_A);
  const double threshold = threshold_closed_form(ThresholdSpec{p_nn, M, 0, sigma});
  ReconstructionResult out = reconstruct_on_support(meas, basis, detect_support(c0, threshold));
  out.threshold_used = threshold;
  out.sigma_estimate = sigma;
  return out;
}

}  // namespace hermcs
