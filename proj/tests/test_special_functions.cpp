#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "spectral_eta/special_functions.hpp"

using namespace spectral_eta::special;

namespace {

double rel(Complex a, Complex b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("gamma on the real axis") {
  for (double x : {0.1, 0.5, 1.0, 2.5, 7.3, 20.0, -0.5, -2.7})
    CHECK(rel(gamma(Complex(x)), Complex(boost::math::tgamma(x))) < 1e-12);
  CHECK(rel(gamma(Complex(0.5)), Complex(std::sqrt(std::numbers::pi))) < 1e-14);
}

TEST_CASE("rgamma vanishes at the non-positive integers") {
  for (int k = 0; k < 6; ++k) CHECK(rgamma(Complex(-k)) == Complex(0.0));
  CHECK(rel(rgamma(Complex(3.0)), Complex(0.5)) < 1e-14);
  // Near a pole 1/Γ(−k + ε) ≈ (−1)^k k! ε.
  const double eps = 1e-7;
  CHECK(std::abs(rgamma(Complex(-2.0 + eps)) - Complex(2.0 * eps)) < 1e-12);
}

TEST_CASE("gamma recurrence and reflection off the axis") {
  for (Complex z : {Complex(0.3, 1.2), Complex(-1.7, 0.4), Complex(4.0, -3.0)}) {
    CHECK(rel(gamma(z + 1.0), z * gamma(z)) < 1e-12);
    CHECK(rel(gamma(z) * gamma(1.0 - z), std::numbers::pi / std::sin(std::numbers::pi * z)) < 1e-11);
  }
  CHECK(std::abs(log_gamma(Complex(10.0)) - std::lgamma(10.0)) < 1e-12);
}

TEST_CASE("upper incomplete gamma") {
  for (double a : {0.5, 1.0, 2.5, 6.0})
    for (double x : {0.01, 0.7, 3.0, 15.0})
      CHECK(rel(upper_gamma(Complex(a), x), Complex(boost::math::tgamma(a, x))) < 1e-11);
  // Γ(½, x) = √π erfc(√x).
  CHECK(rel(upper_gamma(Complex(0.5), 4.0), Complex(std::sqrt(std::numbers::pi) * std::erfc(2.0))) < 1e-12);
  // Γ(0, x) = E₁(x).
  for (double x : {0.05, 1.0, 8.0})
    CHECK(rel(upper_gamma(Complex(0.0), x), Complex(boost::math::expint(1, x))) < 1e-10);
  // Γ(a, 0) = Γ(a).
  CHECK(rel(upper_gamma(Complex(1.5, 0.5), 0.0), gamma(Complex(1.5, 0.5))) < 1e-12);
}

TEST_CASE("upper incomplete gamma recurrence for complex a") {
  const double x = 1.3;
  for (Complex a : {Complex(0.2, 0.7), Complex(-1.4, 0.3), Complex(2.0, -1.0)})
    CHECK(rel(upper_gamma(a + 1.0, x), a * upper_gamma(a, x) + std::pow(x, a) * std::exp(-x)) < 1e-10);
}

TEST_CASE("upper incomplete gamma at negative integers") {
  for (double x : {0.05, 0.5, 2.0}) {
    const double g0 = boost::math::expint(1, x);
    const double gm1 = std::exp(-x) / x - g0;
    CHECK(rel(upper_gamma(Complex(-1.0), x), Complex(gm1)) < 1e-10);
    CHECK(rel(upper_gamma(Complex(-2.0), x), Complex((std::exp(-x) / (x * x) - gm1) / 2.0)) < 1e-10);
  }
}
