#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "hermcs/detect.hpp"
#include "hermcs/random.hpp"
#include "hermcs/special.hpp"
#include "oracles.hpp"

using namespace hermcs;

namespace {

const HermiteBasis& basis200() {
  static const HermiteBasis b = build_basis(200);
  return b;
}

const std::vector<SignalComponent> kFive{{20, 1.0}, {54, 0.7}, {94, 0.5}, {162, 0.3}, {192, 0.2}};
const std::vector<SignalComponent> kEight{{20, 2.5}, {124, 3.3}, {84, 2.6}, {162, 3.1},
                                          {37, 2.7}, {44, 3.5}, {149, 2.3}, {189, 3.4}};

bool contains(const std::vector<int>& v, int x) { return std::binary_search(v.begin(), v.end(), x); }

}  // namespace

TEST(ErfApprox, ValuesAndSymmetry) {
  EXPECT_EQ(erf_approx(0.0), 0.0);
  EXPECT_NEAR(erf_approx(1.0), 0.8427008, 2.5e-4);
  EXPECT_EQ(erf_approx(-2.0), -erf_approx(2.0));
  for (double x = -5.0; x <= 5.0; x += 0.01) EXPECT_NEAR(erf_approx(x), std::erf(x), 1.3e-4);
}

TEST(ErfInverse, MatchesOracle) {
  for (double y : {-0.999999, -0.7, -0.2, 1e-9, 0.3, 0.5, 0.51, 0.9, 0.99995, 1.0 - 1e-12}) {
    const double want = oracle::erf_inv(y);
    EXPECT_NEAR(erf_inv(y), want, 1e-13 * std::max(1.0, std::abs(want))) << y;
  }
  for (double q : {1e-300, 1e-50, 1e-10, 0.3, 1.0, 1.7}) {
    EXPECT_NEAR(std::erfc(erfc_inv(q)) / q, 1.0, 1e-12) << q;
  }
  EXPECT_THROW(erf_inv(1.0), InvalidArgument);
  EXPECT_THROW(erfc_inv(0.0), InvalidArgument);
}

TEST(Threshold, ExactReferenceAndMonotonicity) {
  EXPECT_EQ(threshold_exact({0.99, 200, 0, 0.0}), 0.0);
  const double t = threshold_exact({0.99, 200, 0, 1.0});
  EXPECT_NEAR(t, std::sqrt(2.0) * oracle::erf_inv(std::pow(0.99, 1.0 / 200.0)), 1e-9);
  // 0.99^(1/200) = 0.99994975 → √2·erfinv = 4.0545
  EXPECT_NEAR(t, 4.0545, 5e-4);
  double prev = 0.0;
  for (int M : {50, 100, 200, 400, 1000}) {
    const double v = threshold_exact({0.99, M, 0, 1.0});
    EXPECT_GT(v, prev);
    prev = v;
  }
  prev = 0.0;
  for (double P : {0.5, 0.9, 0.99, 0.999, 0.9999}) {
    const double v = threshold_exact({P, 200, 0, 1.0});
    EXPECT_GT(v, prev);
    prev = v;
  }
  EXPECT_THROW(threshold_exact({1.0, 200, 0, 1.0}), InvalidArgument);
  EXPECT_THROW(threshold_exact({0.0, 200, 0, 1.0}), InvalidArgument);
  EXPECT_THROW(threshold_closed_form({1.5, 200, 0, 1.0}), InvalidArgument);
}

TEST(Threshold, ClosedFormAgreementAndScaling) {
  EXPECT_NEAR(threshold_closed_form({0.99, 200, 0, 1.0}), 4.048, 1e-3);
  EXPECT_NEAR(std::log(1.0 - std::pow(0.99, 0.01)), -9.2054, 1e-3);
  for (int M : {100, 200, 400}) {
    for (double P : {0.9, 0.99, 0.999}) {
      const double e = threshold_exact({P, M, 0, 1.0});
      EXPECT_LT(std::abs(threshold_closed_form({P, M, 0, 1.0}) - e) / e, 0.005) << M << " " << P;
    }
  }
  const double base = threshold_closed_form({0.99, 200, 0, 0.3});
  EXPECT_EQ(threshold_closed_form({0.99, 200, 0, 0.6}), 2.0 * base);
  EXPECT_DOUBLE_EQ(threshold_closed_form({0.99, 200, 0, 0.9}), 3.0 * base);
  EXPECT_EQ(threshold_closed_form({0.99, 200, 0, 0.0}), 0.0);
  // A support-size hint lowers the exponent count and the threshold.
  EXPECT_LT(threshold_closed_form({0.99, 200, 8, 1.0}), threshold_closed_form({0.99, 200, 0, 1.0}));
}

TEST(SigmaEstimate, TrivialCases) {
  EXPECT_EQ(estimate_sigma_from_coefficients(CoefficientVector::zeros(200), 200, 120), 0.0);
  Eigen::VectorXd c = Eigen::VectorXd::Ones(200);
  EXPECT_EQ(estimate_sigma_from_coefficients(CoefficientVector(c), 200, 200), 0.0);
}

TEST(SigmaEstimate, CloseToModel) {
  const auto& b = basis200();
  const SampleVector f = synthesize(SparseSignalSpec(200, kFive), b);
  double mean = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const Measurement meas = measure(f, random_mask(200, 120, trial_seed(31, t)));
    mean += estimate_sigma_from_coefficients(initial_estimate(meas, b), 200, 120);
  }
  mean /= 1000.0;
  const double model = std::sqrt(unit_noise_variance(200, 120) * 1.87);
  EXPECT_NEAR(mean / model, 1.0, 0.10);
}

TEST(SigmaEstimate, EnergyBiasQuantified) {
  // The zero-filled signal coefficients shrink by μ = M_A/M, which costs
  // (1−μ)ΣA² of energy; the noise energy adds back about the same amount.
  // E[σ̂²]/σ² = μ + (M/M_A) Σ_p var(c_p) / ΣA², with the sum taken exactly.
  const auto& b = basis200();
  const SparseSignalSpec spec(200, kFive);
  const SampleVector f = synthesize(spec, b);
  for (int M_A : {56, 120, 176}) {
    double mean2 = 0.0;
    const int n = 2000;
    for (int t = 0; t < n; ++t) {
      const Measurement meas = measure(f, random_mask(200, M_A, trial_seed(37, t)));
      const double s = estimate_sigma_from_coefficients(initial_estimate(meas, b), 200, M_A);
      mean2 += s * s;
    }
    mean2 /= n;
    const double sigma2 = unit_noise_variance(200, M_A) * 1.87;
    const double mu = M_A / 200.0;
    double var_sum = 0.0;
    for (int p = 0; p < 200; ++p) {
      std::vector<double> x(200);
      for (int m = 0; m < 200; ++m) x[static_cast<std::size_t>(m)] = b.weights()(m) * b.table()(p, m) * f[m];
      var_sum += oracle::subset_sum_variance(x, M_A);
    }
    const double expected = mu + 200.0 / M_A * var_sum / 1.87;
    EXPECT_NEAR(mean2 / sigma2, expected, 0.03) << M_A;
    EXPECT_NEAR(expected, 1.0, 0.05) << M_A;
  }
}

TEST(DetectSupport, ThresholdEdges) {
  Eigen::VectorXd c(5);
  c << 0.1, -0.5, 0.2, 0.0, 0.49;
  EXPECT_TRUE(detect_support(CoefficientVector(c), 0.6).empty());
  EXPECT_TRUE(detect_support(CoefficientVector(c), std::numeric_limits<double>::infinity()).empty());
  EXPECT_EQ(detect_support(CoefficientVector(c), 0.15), (std::vector<int>{1, 2, 4}));
  EXPECT_EQ(detect_support(CoefficientVector(c), 0.0), (std::vector<int>{0, 1, 2, 4}));
}

TEST(DetectSupport, EightComponentRealization) {
  // A mask for which detection succeeds (first trial of master seed 1).
  const std::uint64_t seed = 539484414468452969ULL;
  ASSERT_EQ(seed, trial_seed(stream_seed(1, 0), 0));
  const auto& b = basis200();
  const Measurement meas = measure(synthesize(SparseSignalSpec(200, kEight), b), random_mask(200, 135, seed));
  const CoefficientVector c0 = initial_estimate(meas, b);
  const double T = threshold_closed_form({0.99, 200, 0, estimate_sigma_from_coefficients(c0, 200, 135)});
  EXPECT_EQ(detect_support(c0, T), (std::vector<int>{20, 37, 44, 84, 124, 149, 162, 189}));
}

TEST(ReconstructOnSupport, ExactSupportRecovery) {
  const auto& b = basis200();
  const SparseSignalSpec spec(200, kEight);
  const SampleVector f = synthesize(spec, b);
  const Measurement meas = measure(f, random_mask(200, 40, 77));
  const ReconstructionResult r = reconstruct_on_support(meas, b, spec.orders());
  ASSERT_EQ(r.status, ReconstructionStatus::kOk);
  EXPECT_FALSE(r.rank_deficient);
  for (std::size_t j = 0; j < r.support.size(); ++j) {
    const auto it = std::find_if(kEight.begin(), kEight.end(), [&](auto& c) { return c.order == r.support[j]; });
    EXPECT_NEAR(r.coefficients(j), it->amplitude, 1e-8);
  }
  EXPECT_LT((r.reconstructed_signal.values() - f.values()).squaredNorm() / 200.0, 1e-20);
  EXPECT_LT(r.residual_norm, 1e-10);
  EXPECT_GE(r.condition_estimate, 1.0);
}

TEST(ReconstructOnSupport, FullSupportFullMask) {
  const auto& b = basis200();
  const SampleVector f = synthesize(SparseSignalSpec(200, kFive), b);
  std::vector<int> all(200);
  for (int p = 0; p < 200; ++p) all[p] = p;
  const ReconstructionResult r = reconstruct_on_support(measure(f, SamplingMask::full(200)), b, all);
  EXPECT_LT((r.reconstructed_signal.values() - f.values()).squaredNorm() / 200.0, 1e-20);
}

TEST(ReconstructOnSupport, SupersetSupport) {
  const auto& b = basis200();
  const SparseSignalSpec spec(200, kEight);
  const SampleVector f = synthesize(spec, b);
  std::vector<int> sup = spec.orders();
  for (int extra : {3, 99, 140, 175}) sup.push_back(extra);
  const ReconstructionResult r = reconstruct_on_support(measure(f, random_mask(200, 135, 5)), b, sup);
  ASSERT_EQ(r.status, ReconstructionStatus::kOk);
  for (int extra : {3, 99, 140, 175}) EXPECT_LT(std::abs(r.full_coefficients[extra]), 1e-8);
  for (const auto& c : kEight) EXPECT_NEAR(r.full_coefficients[c.order], c.amplitude, 1e-8);
}

TEST(ReconstructOnSupport, StatusPaths) {
  const auto& b = basis200();
  const SampleVector f = synthesize(SparseSignalSpec(200, kFive), b);
  const Measurement meas = measure(f, random_mask(200, 3, 1));
  const ReconstructionResult empty = reconstruct_on_support(meas, b, {});
  EXPECT_EQ(empty.status, ReconstructionStatus::kEmptySupport);
  EXPECT_EQ(empty.full_coefficients.values().squaredNorm(), 0.0);
  const ReconstructionResult big = reconstruct_on_support(meas, b, {1, 2, 3, 4});
  EXPECT_EQ(big.status, ReconstructionStatus::kSupportExceedsMeasurements);
  EXPECT_EQ(to_string(big.status), "support-exceeds-measurements");
  EXPECT_THROW(reconstruct_on_support(meas, b, {200}), InvalidArgument);
}

TEST(ReconstructOnSupport, RankDeficientColumnsGiveMinimumNorm) {
  // Two available samples at symmetric roots cannot separate ψ_0 from ψ_2.
  const auto& b = build_basis(6);
  const Measurement meas = measure(synthesize(SparseSignalSpec(6, {{0, 1.0}}), b), SamplingMask(6, {1, 4}));
  const ReconstructionResult r = reconstruct_on_support(meas, b, {0, 2});
  EXPECT_EQ(r.status, ReconstructionStatus::kOk);
  EXPECT_LT(r.residual_norm, 1e-12);
  EXPECT_TRUE(std::isfinite(r.coefficients.norm()));
}

TEST(Reconstruct, FullMaskExact) {
  const auto& b = basis200();
  const SampleVector f = synthesize(SparseSignalSpec(200, kEight), b);
  const ReconstructionResult r = reconstruct(measure(f, SamplingMask::full(200)), b);
  EXPECT_EQ(r.status, ReconstructionStatus::kOk);
  EXPECT_EQ(r.support, (std::vector<int>{20, 37, 44, 84, 124, 149, 162, 189}));
  EXPECT_LT((r.reconstructed_signal.values() - f.values()).squaredNorm() / 200.0, 1e-20);
}

TEST(Reconstruct, EightComponentsTwentySeeds) {
  const auto& b = basis200();
  const SparseSignalSpec spec(200, kEight);
  const SampleVector f = synthesize(spec, b);
  std::vector<int> truth = spec.orders();
  std::sort(truth.begin(), truth.end());
  int ok = 0;
  for (int t = 0; t < 20; ++t) {
    const ReconstructionResult r = reconstruct(measure(f, random_mask(200, 135, trial_seed(stream_seed(1, 0), t))), b);
    const double mse = (r.reconstructed_signal.values() - f.values()).squaredNorm() / 200.0;
    if (r.support == truth && mse < 1e-20) ++ok;
  }
  EXPECT_GE(ok, 19);
}

TEST(Reconstruct, FiveComponentsAt56) {
  const auto& b = basis200();
  const SampleVector f = synthesize(SparseSignalSpec(200, kFive), b);
  int has1 = 0, has2 = 0, no4 = 0, no5 = 0;
  const int n = 1000;
  for (int t = 0; t < n; ++t) {
    const ReconstructionResult r = reconstruct(measure(f, random_mask(200, 56, trial_seed(stream_seed(1, 0), t))), b);
    has1 += contains(r.support, 20);
    has2 += contains(r.support, 54);
    no4 += !contains(r.support, 162);
    no5 += !contains(r.support, 192);
  }
  EXPECT_GE(has1, 0.97 * n);
  EXPECT_GE(has2, 0.97 * n);
  EXPECT_GE(no4, 0.99 * n);
  EXPECT_GE(no5, 0.99 * n);
}
