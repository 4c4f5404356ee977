#include "spectral_eta/special_functions.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/expint.hpp>

namespace spectral_eta::special {

namespace {

constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

constexpr double kEps = 1e-16;
constexpr int kMaxIter = 2000;

bool is_nonpositive_integer(Complex z) {
  return z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real());
}

Complex lower_series(Complex a, double x) {
  // γ(a, x) = x^a e^{−x} Σ_k x^k / (a (a+1) ... (a+k))
  Complex term = 1.0 / a;
  Complex sum = term;
  for (int k = 1; k < kMaxIter; ++k) {
    term *= x / (a + static_cast<double>(k));
    sum += term;
    if (std::abs(term) < kEps * std::abs(sum)) break;
  }
  return sum * std::exp(a * std::log(x) - x);
}

Complex upper_fraction(Complex a, double x) {
  constexpr double tiny = 1e-300;
  Complex b = x + 1.0 - a;
  Complex c = 1.0 / tiny;
  Complex d = 1.0 / b;
  Complex h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const Complex an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const Complex del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return std::exp(a * std::log(x) - x) * h;
}

}  // namespace

Complex log_gamma(Complex z) {
  if (z.real() < 0.5) {
    // Γ(z)Γ(1−z) = π / sin(πz)
    return std::log(std::numbers::pi) - std::log(std::sin(std::numbers::pi * z)) - log_gamma(1.0 - z);
  }
  z -= 1.0;
  Complex x = kLanczos[0];
  for (std::size_t i = 1; i < kLanczos.size(); ++i) x += kLanczos[i] / (z + static_cast<double>(i));
  const Complex t = z + kLanczosG + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t + std::log(x);
}

Complex gamma(Complex z) {
  if (is_nonpositive_integer(z)) return {std::numeric_limits<double>::infinity(), 0.0};
  if (z.real() < 0.5) return std::numbers::pi / (std::sin(std::numbers::pi * z) * gamma(1.0 - z));
  return std::exp(log_gamma(z));
}

Complex rgamma(Complex z) {
  if (is_nonpositive_integer(z)) return 0.0;
  if (z.real() < 0.5) return std::sin(std::numbers::pi * z) * gamma(1.0 - z) / std::numbers::pi;
  return std::exp(-log_gamma(z));
}

Complex upper_gamma(Complex a, double x) {
  if (x <= 0.0) return gamma(a);
  if (is_nonpositive_integer(a) && x < 1.0) {
    // Γ(0, x) = E₁(x), then Γ(−j, x) = (x^{−j}e^{−x} − Γ(1−j, x))/j.
    Complex g = boost::math::expint(1, x);
    for (int j = 1; j <= static_cast<int>(-a.real()); ++j) g = (std::pow(x, -j) * std::exp(-x) - g) / double(j);
    return g;
  }
  if (x < 1.0 || x < a.real() + 1.0) return gamma(a) - lower_series(a, x);
  return upper_fraction(a, x);
}

}  // namespace spectral_eta::special
