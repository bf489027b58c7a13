// Modified Bessel function K0 on the right half-plane.
#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include "seba/error.hpp"

namespace seba {

namespace detail {

inline std::complex<double> k0_series(std::complex<double> z) {
  const std::complex<double> q = 0.25 * z * z;
  std::complex<double> term = 1.0;  // (z^2/4)^k / (k!)^2
  std::complex<double> i0 = 1.0;
  std::complex<double> hsum = 0.0;
  double harmonic = 0.0;
  for (int k = 1; k < 60; ++k) {
    term *= q / static_cast<double>(k * k);
    harmonic += 1.0 / k;
    i0 += term;
    hsum += harmonic * term;
    if (std::abs(term) * (1.0 + harmonic) < 1e-18 * std::abs(i0)) break;
  }
  return -(std::log(0.5 * z) + std::numbers::egamma) * i0 + hsum;
}

inline std::complex<double> k0_asymptotic(std::complex<double> z) {
  std::complex<double> term = 1.0;
  std::complex<double> sum = 1.0;
  double last = 1.0;
  for (int k = 1; k < 80; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= -odd * odd / (8.0 * k) / z;
    const double mag = std::abs(term);
    if (mag > last) break;
    sum += term;
    last = mag;
    if (mag < 1e-17) break;
  }
  return std::sqrt(std::numbers::pi / (2.0 * z)) * std::exp(-z) * sum;
}

// Trapezoidal rule on K0(z) = int_0^inf exp(-z cosh t) dt. The integrand is
// analytic and bounded in the strip |Im t| < pi/2 - |arg z|, so the rule
// converges geometrically in 1/h.
inline std::complex<double> k0_trapezoid(std::complex<double> z) {
  const double r = std::abs(z);
  const double theta = std::abs(std::arg(z));
  const double d = 0.5 * (std::numbers::pi / 2.0 - theta);
  const double growth = r * (std::cos(theta) - std::cos(theta + d));
  const double h = 2.0 * std::numbers::pi * d / (42.0 + growth);
  const double t_max = std::acosh((r + 42.0) / z.real());
  const int n = static_cast<int>(std::ceil(t_max / h));
  std::complex<double> sum = 0.5 * std::exp(-z);
  for (int k = 1; k <= n; ++k) sum += std::exp(-z * std::cosh(k * h));
  return h * sum;
}

}  // namespace detail

/// K0(z) for Re z > 0: ascending series for |z| <= 2, asymptotic expansion
/// for |z| >= 17, trapezoidal integration of the cosh representation between.
inline std::complex<double> k0_complex(std::complex<double> z) {
  if (!(z.real() > 0.0)) throw DomainError("K0 requires Re z > 0");
  const double r = std::abs(z);
  if (r <= 2.0) return detail::k0_series(z);
  if (r >= 17.0) return detail::k0_asymptotic(z);
  return detail::k0_trapezoid(z);
}

inline double k0_real(double x) { return k0_complex({x, 0.0}).real(); }

}  // namespace seba
