#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hermcs/error.hpp"

namespace hermcs {

/// Largest basis order accepted by hermite_roots / build_basis.
inline constexpr int kMaxOrder = 1000;

namespace detail {

// The recurrence below carries ψ_p(t) as value * exp(log_scale). The Gaussian
// factor e^{-t²/2} starts out in log_scale, and the mantissa is renormalised
// whenever it grows large, so neither H_p(t) nor e^{-t²/2} is ever formed.
inline constexpr double kRescaleAbove = 1e150;
inline constexpr double kRescaleBy = 1e-150;
inline const double kLogRescale = 150.0 * std::numbers::ln10;

inline double unscale(double value, double log_scale) {
  if (value == 0.0) return 0.0;
  return std::copysign(std::exp(std::log(std::abs(value)) + log_scale), value);
}

// Visits (p, ψ_p(t)) for p = 0..last.
template <class Visitor>
void hermite_recurrence(int last, double t, Visitor&& visit) {
  const double pi_quarter = std::pow(std::numbers::pi, -0.25);
  double log_scale = -0.5 * t * t;
  double prev = 0.0;
  double cur = pi_quarter;
  visit(0, unscale(cur, log_scale));
  for (int k = 1; k <= last; ++k) {
    const double next = t * std::sqrt(2.0 / k) * cur - std::sqrt((k - 1.0) / k) * prev;
    prev = cur;
    cur = next;
    if (std::abs(cur) > kRescaleAbove) {
      cur *= kRescaleBy;
      prev *= kRescaleBy;
      log_scale += kLogRescale;
    }
    visit(k, unscale(cur, log_scale));
  }
}

// ψ_{n-1}(t) and ψ_n(t) up to one common positive factor; enough for ratios.
inline std::pair<double, double> scaled_last_pair(int n, double t) {
  double prev = 0.0;
  double cur = 1.0;
  for (int k = 1; k <= n; ++k) {
    const double next = t * std::sqrt(2.0 / k) * cur - std::sqrt((k - 1.0) / k) * prev;
    prev = cur;
    cur = next;
    if (std::abs(cur) > kRescaleAbove) {
      cur *= kRescaleBy;
      prev *= kRescaleBy;
    }
  }
  return {prev, cur};
}

inline void check_order(int order) {
  require(order >= 1 && order <= kMaxOrder,
          "Hermite basis order must be in [1, " + std::to_string(kMaxOrder) +
              "], got " + std::to_string(order));
}

}  // namespace detail

/// Normalised Hermite function ψ_p(t) = (2^p p! √π)^{-1/2} e^{-t²/2} H_p(t).
///
/// Evaluated with the orthonormal three-term recurrence
///   ψ_p = t √(2/p) ψ_{p-1} − √((p-1)/p) ψ_{p-2},
/// which stays finite for p ≤ 1000 and |t| ≤ 60. Far outside the oscillatory
/// region the value underflows to zero.
inline double hermite_function(int p, double t) {
  detail::require(p >= 0, "Hermite function order must be non-negative");
  detail::require(std::isfinite(t), "Hermite function argument must be finite");
  double out = 0.0;
  detail::hermite_recurrence(p, t, [&](int k, double v) {
    if (k == p) out = v;
  });
  return out;
}

/// Fills out[p] = ψ_p(t) for p = 0..out.size()-1.
inline void hermite_functions(double t, std::span<double> out) {
  if (out.empty()) return;
  detail::require(std::isfinite(t), "Hermite function argument must be finite");
  detail::hermite_recurrence(static_cast<int>(out.size()) - 1, t,
                             [&](int k, double v) { out[static_cast<std::size_t>(k)] = v; });
}

/// Zeros of the physicists' Hermite polynomial H_order, ascending.
///
/// Golub–Welsch: eigenvalues of the symmetric tridiagonal Jacobi matrix with
/// zero diagonal and off-diagonals √(k/2), each polished by at most five
/// Newton steps on ψ_order, then symmetrised about the origin.
inline std::vector<double> hermite_roots(int order) {
  detail::check_order(order);
  const int n = order;
  std::vector<double> roots(static_cast<std::size_t>(n), 0.0);
  if (n > 1) {
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd sub(n - 1);
    for (int k = 1; k < n; ++k) sub(k - 1) = std::sqrt(0.5 * k);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
    eig.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) {
      throw NumericFailure("Jacobi eigenvalue solve failed for Hermite order " + std::to_string(n));
    }
    for (int i = 0; i < n; ++i) roots[static_cast<std::size_t>(i)] = eig.eigenvalues()(i);
    std::sort(roots.begin(), roots.end());

    // ψ_n'(t) = √(2n) ψ_{n-1}(t) − t ψ_n(t)
    const double two_n = std::sqrt(2.0 * n);
    for (double& r : roots) {
      for (int it = 0; it < 5; ++it) {
        const auto [lower, upper] = detail::scaled_last_pair(n, r);
        const double slope = two_n * lower - r * upper;
        if (slope == 0.0 || !std::isfinite(slope)) break;
        const double step = upper / slope;
        r -= step;
        if (std::abs(step) <= 4e-16 * std::max(1.0, std::abs(r))) break;
      }
    }
    for (int i = 0; i < n / 2; ++i) {
      const auto lo = static_cast<std::size_t>(i);
      const auto hi = static_cast<std::size_t>(n - 1 - i);
      const double half = 0.5 * (roots[hi] - roots[lo]);
      roots[lo] = -half;
      roots[hi] = half;
    }
    if (n % 2 == 1) roots[static_cast<std::size_t>(n / 2)] = 0.0;
  }
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (!std::isfinite(roots[i]) || (i > 0 && !(roots[i] > roots[i - 1]))) {
      throw NumericFailure("Hermite root finder did not converge for order " + std::to_string(n));
    }
  }
  return roots;
}

/// Discrete Hermite basis of order M: the roots t_m of H_M, the quadrature
/// weights w_m = 1 / (M ψ_{M-1}(t_m)²), and the table F(p, m) = ψ_p(t_m).
///
/// Forward transform: c = F · diag(w) · f. Inverse transform: f = Fᵀ c.
/// Immutable once built, so one instance can be shared across threads.
class HermiteBasis {
 public:
  HermiteBasis(Eigen::VectorXd roots, Eigen::VectorXd weights, Eigen::MatrixXd table)
      : roots_(std::move(roots)), weights_(std::move(weights)), table_(std::move(table)) {
    const auto m = roots_.size();
    detail::require(m >= 1, "basis must have at least one root");
    detail::require(weights_.size() == m && table_.rows() == m && table_.cols() == m,
                    "basis roots, weights and function table must agree in size");
  }

  [[nodiscard]] int order() const noexcept { return static_cast<int>(roots_.size()); }
  [[nodiscard]] const Eigen::VectorXd& roots() const noexcept { return roots_; }
  [[nodiscard]] const Eigen::VectorXd& weights() const noexcept { return weights_; }
  /// F(p, m) = ψ_p(t_m); rows are orders, columns are sample positions.
  [[nodiscard]] const Eigen::MatrixXd& table() const noexcept { return table_; }

  [[nodiscard]] double psi(int p, int m) const { return table_(p, m); }

 private:
  Eigen::VectorXd roots_;
  Eigen::VectorXd weights_;
  Eigen::MatrixXd table_;
};

inline HermiteBasis build_basis(int order) {
  const std::vector<double> roots = hermite_roots(order);
  const int n = order;
  Eigen::VectorXd t(n);
  Eigen::VectorXd w(n);
  Eigen::MatrixXd table(n, n);
  std::vector<double> column(static_cast<std::size_t>(n));
  for (int m = 0; m < n; ++m) {
    t(m) = roots[static_cast<std::size_t>(m)];
    hermite_functions(t(m), column);
    for (int p = 0; p < n; ++p) table(p, m) = column[static_cast<std::size_t>(p)];
    const double last = column.back();
    w(m) = 1.0 / (n * last * last);
    if (!std::isfinite(w(m)) || !(w(m) > 0.0)) {
      throw NumericFailure("non-finite quadrature weight for Hermite order " + std::to_string(n));
    }
  }
  return HermiteBasis(std::move(t), std::move(w), std::move(table));
}

/// max_{p,k} |Σ_m w_m ψ_p(t_m) ψ_k(t_m) − δ(p−k)|
inline double orthonormality_defect(const HermiteBasis& basis) {
  const Eigen::MatrixXd& f = basis.table();
  const Eigen::MatrixXd gram = f * basis.weights().asDiagonal() * f.transpose();
  return (gram - Eigen::MatrixXd::Identity(basis.order(), basis.order())).cwiseAbs().maxCoeff();
}

/// max_{m,n} |Σ_p w_m ψ_p(t_m) ψ_p(t_n) − δ(m−n)|, i.e. how far the weighted
/// analysis matrix is from a right inverse of the synthesis matrix.
inline double dual_orthonormality_defect(const HermiteBasis& basis) {
  const Eigen::MatrixXd& f = basis.table();
  const Eigen::MatrixXd gram = f.transpose() * f * basis.weights().asDiagonal();
  return (gram - Eigen::MatrixXd::Identity(basis.order(), basis.order())).cwiseAbs().maxCoeff();
}

}  // namespace hermcs
