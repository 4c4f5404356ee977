#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "spectral_eta/error.hpp"
#include "spectral_eta/eta_zeta.hpp"
#include "spectral_eta/models.hpp"

using namespace spectral_eta;

namespace {

Matrix diag(std::initializer_list<double> d) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double x : d) v(i++) = x;
  return v.asDiagonal();
}

int signature(const Spectrum& s) { return s.positive_count() - s.negative_count(); }

OperatorPair raw_pair(const Matrix& a0, const Matrix& a1) {
  return make_pair(DiracOperator::raw(a0), DiracOperator::raw(a1));
}

Matrix random_unitary(int n, Rng& rng) {
  std::normal_distribution<double> g;
  Matrix z(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) z(i, j) = Complex(g(rng), g(rng));
  Eigen::HouseholderQR<Matrix> qr(z);
  return qr.householderQ() * Matrix::Identity(n, n);
}

}  // namespace

TEST_CASE("signature oracle on small diagonal pairs") {
  const EtaValue e = relative_eta_invariant(raw_pair(diag({1.0, -1.0}), diag({1.0, 1.0})));
  CHECK(e.finite_part == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(e.residue == 0.0);
  CHECK_FALSE(e.irregular_at_zero);

  const EtaValue k = relative_eta_invariant(raw_pair(diag({1.0, 0.0}), diag({-2.0, 0.0})));
  CHECK(k.finite_part == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(k.kernel_dim_a0 == 1);
  CHECK(k.kernel_dim_a1 == 1);
  CHECK(reduced_eta(k) == doctest::Approx(-1.0).epsilon(1e-12));

  const EtaValue z = relative_eta_invariant(raw_pair(diag({3.0, -0.5}), diag({3.0, -0.5})));
  CHECK(std::abs(z.finite_part) < 1e-14);
}

TEST_CASE("signature oracle on random pairs, both tails") {
  Rng rng(77);
  for (int trial = 0; trial < 5; ++trial) {
    const OperatorPair p = random_block_pair(30, 8, rng, 1e-3);
    const PairSpectra ps = eigensolve(p, false);
    const double expected = signature(ps.a1) - signature(ps.a0);
    EtaConfig closed;
    CHECK(std::abs(relative_eta_invariant(ps, 1, closed).finite_part - expected) < 1e-8);
    EtaConfig quad;
    quad.tail = TailMode::quadrature;
    CHECK(std::abs(relative_eta_invariant(ps, 1, quad).finite_part - expected) < 1e-4);
  }
}

TEST_CASE("zeta at zero counts nonzero eigenvalues") {
  const ZetaValue z = relative_zeta_invariant(raw_pair(diag({1.0, 0.0, 0.0}), diag({2.0, -1.0, 0.0})));
  CHECK(z.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(z.kernel_dim_a0 == 2);
  CHECK(z.kernel_dim_a1 == 1);
  const ZetaValue same = relative_zeta_invariant(raw_pair(diag({4.0, -3.0}), diag({0.5, 7.0})));
  CHECK(std::abs(same.value) < 1e-12);
}

TEST_CASE("direct eta sums") {
  const Spectrum s = Spectrum::from_values({-2.0, 0.0, 1.0, 4.0});
  CHECK(std::abs(eta_direct(s, 0.0) - Complex(1.0)) < 1e-15);
  CHECK(std::abs(eta_direct(s, 1.0) - Complex(-0.5 + 1.0 + 0.25)) < 1e-15);
  CHECK(std::abs(eta_direct(s, 2.0) - Complex(-0.25 + 1.0 + 1.0 / 16.0)) < 1e-15);
}

TEST_CASE("relative eta function continues the direct sums") {
  Rng rng(5);
  const OperatorPair p = random_block_pair(16, 6, rng, 1e-2);
  const PairSpectra ps = eigensolve(p, false);
  for (Complex s : {Complex(0.7), Complex(2.0, 1.0), Complex(-0.4, 0.3), Complex(-2.5)}) {
    const Complex direct = eta_direct(ps.a1, s) - eta_direct(ps.a0, s);
    CHECK(std::abs(relative_eta_function(ps, s, 1) - direct) < 1e-8 * std::max(1.0, std::abs(direct)));
  }
}

TEST_CASE("closed-form tail") {
  CHECK(closed_form_tail(Spectrum::from_values({1.0}), 4.0, true) ==
        doctest::Approx(std::sqrt(std::numbers::pi) * std::erfc(2.0)));
  CHECK(closed_form_tail(Spectrum::from_values({-1.0, 0.0}), 4.0, true) ==
        doctest::Approx(-std::sqrt(std::numbers::pi) * std::erfc(2.0)));
  CHECK_THROWS_AS(closed_form_tail(Spectrum::from_values({1.0}), 0.0, true), Error);
}

TEST_CASE("exact Taylor coefficients of a single eigenvalue") {
  // Tr 𝒜₁e^{−t𝒜₁²} − 0 = e^{−t}, so b_{n+1+2m} = (−1)^m/m! and all other b_k vanish.
  const PairSpectra ps{Spectrum::from_values({0.0}), Spectrum::from_values({1.0})};
  FitConfig cfg;
  const AsymptoticFit fit = fit_short_time(eta_terms(ps), ExpansionKind::eta, 1, cfg);
  REQUIRE(fit.K >= 6);
  CHECK(fit.coeffs[2] == doctest::Approx(1.0));
  CHECK(fit.coeffs[4] == doctest::Approx(-1.0));
  CHECK(fit.coeffs[6] == doctest::Approx(0.5));
  for (int k = 1; k <= fit.K; k += 2) CHECK(fit.coeffs[k] == 0.0);
  CHECK(fit.coeffs[0] == 0.0);
  const auto poles = fit.poles();
  REQUIRE_FALSE(poles.empty());
  CHECK(poles.back() == -1.0);
  for (double q : poles) CHECK(std::fmod(q, 2.0) == -1.0);
}

TEST_CASE("near a pole of the continuation") {
  const PairSpectra ps{Spectrum::from_values({0.0}), Spectrum::from_values({1.0})};
  try {
    relative_eta_function(ps, Complex(-1.0 + 1e-8), 1);
    FAIL("expected NearPole");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::near_pole);
  }
}

TEST_CASE("invariance under scaling and unitary conjugation") {
  Rng rng(9);
  const OperatorPair p = random_block_pair(20, 5, rng, 1e-2);
  const double eta = relative_eta_invariant(p).finite_part;
  const OperatorPair scaled = raw_pair(3.7 * p.a0.matrix, 3.7 * p.a1.matrix);
  CHECK(relative_eta_invariant(scaled).finite_part == doctest::Approx(eta).epsilon(1e-10));
  const Matrix u = random_unitary(20, rng);
  const Matrix c0 = u * p.a0.matrix * u.adjoint();
  const Matrix c1 = u * p.a1.matrix * u.adjoint();
  const OperatorPair conj = raw_pair(0.5 * (c0 + c0.adjoint()), 0.5 * (c1 + c1.adjoint()));
  CHECK(relative_eta_invariant(conj).finite_part == doctest::Approx(eta).epsilon(1e-10));
}

TEST_CASE("additivity over a triple") {
  Rng rng(31);
  const auto t = random_block_triple(24, 6, rng, 0.2);
  const std::vector<Complex> s = {Complex(0.5), Complex(1.5, 0.5), Complex(-0.7)};
  CHECK(additivity_check(t[0], t[1], t[2], s) < 1e-8);
}

TEST_CASE("least-squares fit in spectral units reproduces the oracle") {
  Rng rng(13);
  const OperatorPair p = random_block_pair(24, 6, rng, 1e-3);
  const PairSpectra ps = eigensolve(p, false);
  EtaConfig cfg;
  cfg.fit.mode = FitMode::least_squares;
  cfg.fit.units = WindowUnits::spectral;
  cfg.fit.t_lo = 1e-3;
  cfg.fit.t_cut = 0.25;
  cfg.fit.K = 8;
  const EtaValue e = relative_eta_invariant(ps, 1, cfg);
  CHECK(std::abs(e.residue) < 1e-3);
  CHECK(std::abs(e.finite_part - (signature(ps.a1) - signature(ps.a0))) < 1e-3);
}

TEST_CASE("invalid fit windows") {
  const PairSpectra ps{Spectrum::from_values({-1.0}), Spectrum::from_values({1.0})};
  EtaConfig cfg;
  cfg.fit.mode = FitMode::least_squares;
  cfg.fit.t_lo = 1.0;
  cfg.fit.t_cut = 0.5;
  CHECK_THROWS_AS(relative_eta_invariant(ps, 1, cfg), Error);
  cfg.fit.t_lo = 0.1;
  cfg.fit.samples = 4;
  cfg.fit.K = 8;
  try {
    relative_eta_invariant(ps, 1, cfg);
    FAIL("expected FitUnstable");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::fit_unstable);
  }
}

TEST_CASE("continuum model has no even-index eta coefficients") {
  // Smooth patch with a scalar part (a pure σ₃ patch has a symmetric
  // spectrum and a vanishing trace) on a periodic spectral grid. The window
  // sits between the lattice scale and the mass scale; at matrix-level times
  // Tr(𝒜₁ − 𝒜₀) shows up as a t⁰ term, which is k = 2.
  const int points = 512;
  const Grid g = Grid::centered(1, points, 16.0 / points, Topology::periodic);
  std::vector<double> mass(points, 1.0), patch(points), scalar(points);
  for (int i = 0; i < points; ++i) {
    const double x = g.coordinate(i, 0);
    patch[i] = std::abs(x) < 4.0 ? -0.8 * std::exp(-x * x) : 0.0;
    scalar[i] = std::abs(x) < 4.0 ? 0.5 * std::exp(-x * x) : 0.0;
  }
  const DiracOperator a0 = build_dirac_1d(g, Potential::sigma3(mass), DerivativeScheme::spectral);
  const OperatorPair p = make_pair(a0, Potential::diagonal(scalar, patch));
  FitConfig cfg;
  cfg.mode = FitMode::least_squares;
  cfg.t_lo = 0.003;
  cfg.t_cut = 0.03;
  cfg.K = 9;
  const AsymptoticFit fit = fit_short_time(eta_terms(eigensolve(p, false)), ExpansionKind::eta, 1, cfg);
  double odd = 0.0, even = 0.0;
  for (int k = 0; k <= fit.K; ++k) {
    const double scaled = std::abs(fit.coeffs[k]) * std::pow(fit.t_cut, fit.exponent(k));
    (k % 2 ? odd : even) = std::max(k % 2 ? odd : even, scaled);
  }
  REQUIRE(odd > 0.0);
  CHECK(even / odd < 1e-2);
}

TEST_CASE("finite part does not depend on the split point") {
  Rng rng(29);
  const PairSpectra ps = eigensolve(random_block_pair(20, 5, rng, 1e-2), false);
  const double expected = signature(ps.a1) - signature(ps.a0);
  for (double t_cut : {0.1, 1.0, 10.0}) {
    EtaConfig cfg;
    cfg.fit.t_cut = t_cut;
    CHECK(std::abs(relative_eta_invariant(ps, 1, cfg).finite_part - expected) < 1e-8);
  }
}
