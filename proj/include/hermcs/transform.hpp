#pragma once

#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "hermcs/basis.hpp"
#include "hermcs/error.hpp"

namespace hermcs {

namespace detail {

template <class Tag>
class TaggedVector {
 public:
  TaggedVector() = default;
  explicit TaggedVector(Eigen::VectorXd values) : values_(std::move(values)) {
    for (Eigen::Index i = 0; i < values_.size(); ++i) {
      require(std::isfinite(values_(i)), "vector entries must be finite");
    }
  }
  static TaggedVector zeros(int length) { return TaggedVector(Eigen::VectorXd::Zero(length)); }

  [[nodiscard]] int size() const noexcept { return static_cast<int>(values_.size()); }
  [[nodiscard]] const Eigen::VectorXd& values() const noexcept { return values_; }
  [[nodiscard]] double operator[](int i) const { return values_(i); }

 private:
  Eigen::VectorXd values_;
};

struct SampleTag {};
struct CoefficientTag {};

}  // namespace detail

/// Signal samples f(t_m) on the Hermite-root grid (0-based m).
using SampleVector = detail::TaggedVector<detail::SampleTag>;
/// Hermite coefficients c_0 .. c_{M-1}.
using CoefficientVector = detail::TaggedVector<detail::CoefficientTag>;

/// Gauss–Hermite quadrature: c_p = Σ_m w_m ψ_p(t_m) f(t_m).
inline CoefficientVector forward(const SampleVector& signal, const HermiteBasis& basis) {
  detail::require(signal.size() == basis.order(),
                  "signal length " + std::to_string(signal.size()) + " does not match basis order " +
                      std::to_string(basis.order()));
  return CoefficientVector(basis.table() * basis.weights().cwiseProduct(signal.values()));
}

/// f(t_m) = Σ_p c_p ψ_p(t_m).
inline SampleVector inverse(const CoefficientVector& coeffs, const HermiteBasis& basis) {
  detail::require(coeffs.size() == basis.order(),
                  "coefficient length " + std::to_string(coeffs.size()) +
                      " does not match basis order " + std::to_string(basis.order()));
  return SampleVector(basis.table().transpose() * coeffs.values());
}

}  // namespace hermcs
