#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string>

#include "fockforge/error.hpp"

namespace fockforge {

inline constexpr int kBoysMaxOrder = 16;

namespace detail {

inline constexpr double kBoysSeriesLimit = 12.0;
inline constexpr double kBoysTableLimit = 30.0;
inline constexpr double kBoysAsymptoticLimit = 120.0;  // e^{-x} below F_16(x) * 1e-30

// e^{-x} sum_k (2x)^k / ((2m+1)(2m+3)...(2m+2k+1)); all terms positive.
inline double boys_series(int m, double x) {
  double term = 1.0 / (2 * m + 1);
  double sum = term;
  const double two_x = 2.0 * x;
  for (int k = 1; k < 400; ++k) {
    term *= two_x / (2 * m + 2 * k + 1);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum * std::exp(-x);
}

// (2m-1)!! / 2^{m+1} * sqrt(pi / x^{2m+1}); the dropped terms are O(e^{-x}).
inline double boys_asymptotic(int m, double x) {
  double v = 0.5 * std::sqrt(std::numbers::pi / x);
  for (int k = 1; k <= m; ++k) v *= (2 * k - 1) / (2.0 * x);
  return v;
}

// erf form of F_0 and upward recursion; stable for x >= 12 at m <= 16.
inline double boys_upward(int m, double x, double* out = nullptr) {
  const double ex = std::exp(-x);
  double f = 0.5 * std::sqrt(std::numbers::pi / x) * std::erf(std::sqrt(x));
  if (out) out[0] = f;
  for (int k = 0; k < m; ++k) {
    f = ((2 * k + 1) * f - ex) / (2.0 * x);
    if (out) out[k + 1] = f;
  }
  return f;
}

} // namespace detail

/// F_m(x) = int_0^1 t^{2m} exp(-x t^2) dt for 0 <= m <= 16, x >= 0.
inline double boys(int m, double x) {
  if (m < 0 || m > kBoysMaxOrder) throw Error("boys: order " + std::to_string(m) + " outside 0..16");
  if (!(x >= 0.0) || !std::isfinite(x)) throw Error("boys: argument must be finite and non-negative");
  if (x < detail::kBoysSeriesLimit) return detail::boys_series(m, x);
  if (x > detail::kBoysAsymptoticLimit) return detail::boys_asymptotic(m, x);
  return detail::boys_upward(m, x);
}

namespace detail {

// F_m on a grid of step 0.05 over [0, 30] for Taylor interpolation; built
// from the positive-term series, which has no cancellation at any x.
struct BoysTable {
  static constexpr double kStep = 0.05;
  static constexpr int kPoints = 601;
  static constexpr int kTaylor = 7;  // |dx| <= 0.025 leaves a remainder below 1e-15
  static constexpr int kOrders = kBoysMaxOrder + kTaylor;
  double f[kPoints][kOrders];
};

inline const BoysTable& boys_table() {
  static const BoysTable t = [] {
    BoysTable b;
    for (int g = 0; g < BoysTable::kPoints; ++g)
      for (int m = 0; m < BoysTable::kOrders; ++m) b.f[g][m] = boys_series(m, g * BoysTable::kStep);
    return b;
  }();
  return t;
}

} // namespace detail

/// Fills out[0..m_max] with F_0(x)..F_{m_max}(x). Unchecked; m_max <= 16.
/// Interpolates the table at F_{m_max} and recurses downward.
inline void boys_array(int m_max, double x, double* out) {
  if (x < detail::kBoysTableLimit) {
    using T = detail::BoysTable;
    const auto& tab = detail::boys_table();
    const int g = static_cast<int>(x * (1.0 / T::kStep) + 0.5);
    const double dx = g * T::kStep - x;
    const double* row = tab.f[g] + m_max;
    double v = row[T::kTaylor - 1];
    for (int k = T::kTaylor - 1; k > 0; --k) v = row[k - 1] + v * dx / k;
    out[m_max] = v;
    if (m_max == 0) return;
    const double ex = std::exp(-x);
    for (int m = m_max - 1; m >= 0; --m) out[m] = (2.0 * x * out[m + 1] + ex) / (2 * m + 1);
  } else if (x < detail::kBoysAsymptoticLimit) {
    detail::boys_upward(m_max, x, out);
  } else {
    out[0] = 0.5 * std::sqrt(std::numbers::pi / x);
    for (int m = 1; m <= m_max; ++m) out[m] = out[m - 1] * (2 * m - 1) / (2.0 * x);
  }
}

} // namespace fockforge
