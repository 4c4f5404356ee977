#pragma once

#include <complex>

namespace spectral_eta::special {

using Complex = std::complex<double>;

/// log Γ(z) on the principal branch (Lanczos, g = 7), with reflection for Re z < 1/2.
Complex log_gamma(Complex z);
Complex gamma(Complex z);
/// 1/Γ(z); entire, exactly zero at the non-positive integers.
Complex rgamma(Complex z);

/// Γ(a, x) for complex a and real x ≥ 0. Series below max(1, Re(a) + 1),
/// Legendre continued fraction above. Loses digits when a is within ~1e-8 of a
/// non-positive integer (exact integers are handled through E₁).
Complex upper_gamma(Complex a, double x);

inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

}  // namespace spectral_eta::special
