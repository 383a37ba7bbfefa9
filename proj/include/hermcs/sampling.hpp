#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hermcs/basis.hpp"
#include "hermcs/error.hpp"
#include "hermcs/random.hpp"
#include "hermcs/transform.hpp"

namespace hermcs {

/// The set of available sample positions. Positions are 0-based indices into
/// the root grid (documentation elsewhere may count them 1..M).
class SamplingMask {
 public:
  SamplingMask(int total, std::vector<int> available) : total_(total), available_(std::move(available)) {
    detail::require(total_ >= 1, "mask total length must be positive");
    std::sort(available_.begin(), available_.end());
    detail::require(!available_.empty() && static_cast<int>(available_.size()) <= total_,
                    "mask must keep between 1 and M samples");
    detail::require(available_.front() >= 0 && available_.back() < total_,
                    "mask position out of range");
    detail::require(std::adjacent_find(available_.begin(), available_.end()) == available_.end(),
                    "mask positions must be distinct");
  }

  static SamplingMask full(int total) {
    std::vector<int> all(static_cast<std::size_t>(total));
    std::iota(all.begin(), all.end(), 0);
    return SamplingMask(total, std::move(all));
  }

  [[nodiscard]] int total() const noexcept { return total_; }
  /// M_A
  [[nodiscard]] int available_count() const noexcept { return static_cast<int>(available_.size()); }
  /// M_Q = M − M_A
  [[nodiscard]] int missing_count() const noexcept { return total_ - available_count(); }
  [[nodiscard]] const std::vector<int>& available() const& noexcept { return available_; }
  [[nodiscard]] std::vector<int> available() && noexcept { return std::move(available_); }

  friend bool operator==(const SamplingMask&, const SamplingMask&) = default;

 private:
  int total_;
  std::vector<int> available_;
};

struct Measurement {
  Eigen::VectorXd values;  // y_cs, in mask order
  SamplingMask mask;
};

struct SignalComponent {
  int order;         // p_i
  double amplitude;  // A_i
};

/// K components (p_i, A_i) on a length-M grid.
class SparseSignalSpec {
 public:
  SparseSignalSpec(int length, std::vector<SignalComponent> components)
      : length_(length), components_(std::move(components)) {
    detail::require(length_ >= 1, "signal length must be positive");
    detail::require(static_cast<int>(components_.size()) <= length_, "more components than positions");
    std::vector<int> orders;
    for (const auto& c : components_) {
      detail::require(c.order >= 0 && c.order < length_,
                      "component order " + std::to_string(c.order) + " out of range [0, " +
                          std::to_string(length_) + ")");
      detail::require(c.amplitude != 0.0 && std::isfinite(c.amplitude),
                      "component amplitudes must be finite and non-zero");
      orders.push_back(c.order);
    }
    std::sort(orders.begin(), orders.end());
    detail::require(std::adjacent_find(orders.begin(), orders.end()) == orders.end(),
                    "component orders must be distinct");
  }

  [[nodiscard]] int length() const noexcept { return length_; }
  [[nodiscard]] int sparsity() const noexcept { return static_cast<int>(components_.size()); }
  [[nodiscard]] const std::vector<SignalComponent>& components() const noexcept { return components_; }

  [[nodiscard]] std::vector<double> amplitudes() const {
    std::vector<double> a;
    a.reserve(components_.size());
    for (const auto& c : components_) a.push_back(c.amplitude);
    return a;
  }
  [[nodiscard]] std::vector<int> orders() const {
    std::vector<int> p;
    p.reserve(components_.size());
    for (const auto& c : components_) p.push_back(c.order);
    return p;
  }
  [[nodiscard]] double energy() const {
    double e = 0.0;
    for (const auto& c : components_) e += c.amplitude * c.amplitude;
    return e;
  }

 private:
  int length_;
  std::vector<SignalComponent> components_;
};

/// Uniformly random M_A-subset of the M positions (partial Fisher–Yates on a
/// SplitMix64 stream), deterministic in `seed`.
inline SamplingMask random_mask(int total, int available, std::uint64_t seed) {
  detail::require(total >= 1, "mask total length must be positive");
  detail::require(available >= 1 && available <= total,
                  "available sample count must be in [1, M], got " + std::to_string(available));
  std::vector<int> perm(static_cast<std::size_t>(total));
  std::iota(perm.begin(), perm.end(), 0);
  SplitMix64 rng(seed);
  for (int i = 0; i < available; ++i) {
    const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(total - i)));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  perm.resize(static_cast<std::size_t>(available));
  return SamplingMask(total, std::move(perm));
}

/// s(m) = Σ_i A_i ψ_{p_i}(t_m)
inline SampleVector synthesize(const SparseSignalSpec& spec, const HermiteBasis& basis) {
  detail::require(spec.length() == basis.order(), "signal spec length does not match basis order");
  Eigen::VectorXd s = Eigen::VectorXd::Zero(basis.order());
  for (const auto& c : spec.components()) s += c.amplitude * basis.table().row(c.order).transpose();
  return SampleVector(std::move(s));
}

inline Measurement measure(const SampleVector& signal, const SamplingMask& mask) {
  detail::require(signal.size() == mask.total(), "signal length does not match mask length");
  Eigen::VectorXd y(mask.available_count());
  for (int i = 0; i < mask.available_count(); ++i) {
    y(i) = signal[mask.available()[static_cast<std::size_t>(i)]];
  }
  return Measurement{std::move(y), mask};
}

/// The measured samples placed back on the full grid with zeros at the
/// missing positions.
inline SampleVector zero_filled(const Measurement& meas) {
  detail::require(meas.values.size() == meas.mask.available_count(),
                  "measurement length does not match its mask");
  Eigen::VectorXd f = Eigen::VectorXd::Zero(meas.mask.total());
  for (int i = 0; i < meas.mask.available_count(); ++i) {
    f(meas.mask.available()[static_cast<std::size_t>(i)]) = meas.values(i);
  }
  return SampleVector(std::move(f));
}

/// Coefficients of the zero-filled signal: c_p = Σ_{m available} w_m ψ_p(t_m) y(m).
/// Missing samples act as zeros; this is the quantity whose mean and variance
/// the stats module predicts.
inline CoefficientVector initial_estimate(const Measurement& meas, const HermiteBasis& basis) {
  detail::require(meas.mask.total() == basis.order(), "mask length does not match basis order");
  return forward(zero_filled(meas), basis);
}

}  // namespace hermcs
