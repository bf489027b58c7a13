#include <gtest/gtest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <complex>
#include <numbers>

#include "seba/bessel.hpp"

using namespace seba;
using cplx = std::complex<double>;

namespace {

// K0(z) = int_0^inf 2 exp(-z (1 + u^2)) / sqrt(2 + u^2) du, from the
// representation int_1^inf exp(-w z)/sqrt(w^2 - 1) dw with w = 1 + u^2.
cplx k0_oracle(cplx z) {
  boost::math::quadrature::exp_sinh<double> q;
  auto re = [z](double u) { return (2.0 * std::exp(-z * (1.0 + u * u))).real() / std::sqrt(2.0 + u * u); };
  auto im = [z](double u) { return (2.0 * std::exp(-z * (1.0 + u * u))).imag() / std::sqrt(2.0 + u * u); };
  return {q.integrate(re), q.integrate(im)};
}

}  // namespace

TEST(K0, ValueAtOne) {
  EXPECT_NEAR(k0_real(1.0), 0.42102443824070834, 1e-16);
  EXPECT_NEAR(k0_oracle(1.0).real(), 0.42102443824070834, 1e-14);
}

TEST(K0, RealAxisAgainstBoost) {
  for (double x : {1e-6, 0.01, 0.3, 1.0, 1.99, 2.01, 5.0, 9.7, 16.9, 17.1, 30.0, 80.0, 300.0}) {
    const double ref = boost::math::cyl_bessel_k(0, x);
    EXPECT_NEAR(k0_real(x), ref, 1e-13 * ref) << x;
  }
}

TEST(K0, ComplexAgainstIntegralRepresentation) {
  for (double r : {0.2, 1.5, 2.5, 6.0, 12.0, 16.5, 18.0, 25.0}) {
    for (double th : {-1.2, -0.785398, -0.3, 0.0, 0.5, 0.785398, 1.2}) {
      const cplx z = std::polar(r, th);
      const cplx ref = k0_oracle(z);
      EXPECT_LE(std::abs(k0_complex(z) - ref), 1e-12 * std::abs(ref)) << z;
    }
  }
}

TEST(K0, BranchCrossoversAreContinuous) {
  for (double th : {-1.4, -0.7, 0.0, 0.9, 1.45}) {
    const cplx z2 = std::polar(2.0, th), z17 = std::polar(17.0, th);
    const cplx m2 = detail::k0_trapezoid(z2), m17 = detail::k0_trapezoid(z17);
    EXPECT_LE(std::abs(detail::k0_series(z2) - m2), 1e-12 * std::abs(m2)) << th;
    EXPECT_LE(std::abs(detail::k0_asymptotic(z17) - m17), 1e-12 * std::abs(m17)) << th;
  }
}

TEST(K0, SmallArgumentLogarithm) {
  for (double r : {1e-3, 1e-6, 1e-9}) {
    const cplx z = std::polar(r, 0.6);
    EXPECT_LT(std::abs(k0_complex(z) + std::log(0.5 * z) + std::numbers::egamma), 10 * r * r * std::abs(std::log(r)) + 1e-14);
  }
}

TEST(K0, ConjugateSymmetry) {
  for (const cplx z : {cplx(1.0, 2.0), cplx(0.3, -7.0), cplx(20.0, 15.0), cplx(5.0, 0.1)}) {
    const cplx a = std::conj(k0_complex(z));
    const cplx b = k0_complex(std::conj(z));
    EXPECT_EQ(a, b);
  }
}

TEST(K0, RejectsLeftHalfPlane) {
  EXPECT_THROW(k0_complex({0.0, 1.0}), DomainError);
  EXPECT_THROW(k0_complex({-1.0, 0.0}), DomainError);
}
