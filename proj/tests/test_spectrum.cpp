#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "spectral_eta/error.hpp"
#include "spectral_eta/models.hpp"
#include "spectral_eta/spectrum.hpp"

using namespace spectral_eta;

namespace {

Matrix diag(std::initializer_list<double> d) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double x : d) v(i++) = x;
  return v.asDiagonal();
}

}  // namespace

TEST_CASE("diagonal matrix") {
  const Spectrum s = eigensolve(diag({3.0, -1.0, 0.0}), true);
  REQUIRE(s.eigenvalues.size() == 3);
  CHECK(s.eigenvalues(0) == doctest::Approx(-1.0));
  CHECK(s.eigenvalues(1) == doctest::Approx(0.0));
  CHECK(s.eigenvalues(2) == doctest::Approx(3.0));
  CHECK(kernel_dim(s) == 1);
  CHECK(s.negative_count() == 1);
  CHECK(s.positive_count() == 1);
  CHECK(s.spectral_radius() == doctest::Approx(3.0));
  REQUIRE(s.eigenvectors.has_value());
  CHECK(std::abs((*s.eigenvectors)(2, 0)) == doctest::Approx(0.0));
  CHECK(std::abs((*s.eigenvectors)(0, 2)) == doctest::Approx(1.0));
}

TEST_CASE("sigma2 has eigenvalues -1 and 1") {
  const Spectrum s = eigensolve(sigma(2), true);
  CHECK(s.eigenvalues(0) == doctest::Approx(-1.0));
  CHECK(s.eigenvalues(1) == doctest::Approx(1.0));
  const Matrix& v = *s.eigenvectors;
  CHECK((sigma(2) * v - v * s.eigenvalues.cast<Complex>().asDiagonal()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("non-Hermitian input is rejected") {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = 1.0;
  try {
    eigensolve(m, false);
    FAIL("expected NotSelfAdjoint");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::not_self_adjoint);
  }
  CHECK_THROWS_AS(eigensolve(Matrix::Zero(2, 3), false), Error);
}

TEST_CASE("kernel dimension uses the relative threshold") {
  CHECK(kernel_dim(Spectrum::from_values({0.0, 0.0, 1.0})) == 2);
  CHECK(kernel_dim(Spectrum::from_values({1e-12, 2.0})) == 1);
  CHECK(kernel_dim(Spectrum::from_values({1e-6, 2.0})) == 0);
  CHECK(kernel_dim(Spectrum::from_values({1e-6, 2.0}, 1e-5)) == 1);
}

TEST_CASE("heat and eta traces") {
  const Spectrum s = Spectrum::from_values({-1.0, 0.0, 2.0});
  const double t = 0.3;
  CHECK(heat_trace(s, t) == doctest::Approx(std::exp(-t) + 1.0 + std::exp(-4.0 * t)));
  CHECK(eta_trace(s, t) == doctest::Approx(-std::exp(-t) + 2.0 * std::exp(-4.0 * t)));
  CHECK_THROWS_AS(heat_trace(s, 0.0), Error);
  CHECK_THROWS_AS(eta_trace(s, -1.0), Error);
}

TEST_CASE("relative trace is antisymmetric") {
  const PairSpectra p{Spectrum::from_values({-2.0, 0.5, 1.0}), Spectrum::from_values({-1.0, 0.0, 3.0})};
  const PairSpectra q{p.a1, p.a0};
  for (double t : {0.01, 0.5, 4.0}) {
    CHECK(relative_trace(p, t, true) == doctest::Approx(-relative_trace(q, t, true)));
    CHECK(relative_trace(p, t, false) == doctest::Approx(-relative_trace(q, t, false)));
    CHECK(relative_trace(p, t, true) == doctest::Approx(eta_trace(p.a1, t) - eta_trace(p.a0, t)));
  }
}

TEST_CASE("spectral gap skips the kernel") {
  const PairSpectra p{Spectrum::from_values({-0.7, 0.0, 2.0}), Spectrum::from_values({0.4, 5.0})};
  CHECK(spectral_gap(p) == doctest::Approx(0.4));
  const PairSpectra z{Spectrum::from_values({0.0, 0.0}), Spectrum::from_values({0.0})};
  try {
    spectral_gap(z);
    FAIL("expected DegenerateSpectrum");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::degenerate_spectrum);
  }
}

TEST_CASE("banded and dense lattice solves agree") {
  // A central-difference operator on a truncated line is banded; adding a
  // far coupling forces the dense path on an otherwise identical matrix.
  const int n = 40;
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = std::cos(0.4 * i);
  const Grid g = Grid::centered(1, n, 0.25, Topology::truncated_line);
  const DiracOperator a = build_dirac_1d(g, Potential::sigma3(v), DerivativeScheme::central_difference);
  const Spectrum banded = eigensolve(a, true);
  Matrix m = a.matrix;
  m(0, 2 * n - 1) += 1e-300;
  m(2 * n - 1, 0) += 1e-300;
  const Spectrum dense = eigensolve(m, true);
  CHECK((banded.eigenvalues - dense.eigenvalues).cwiseAbs().maxCoeff() < 1e-12);
  const Matrix& u = *banded.eigenvectors;
  CHECK((a.matrix * u - u * banded.eigenvalues.cast<Complex>().asDiagonal()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((u.adjoint() * u - Matrix::Identity(2 * n, 2 * n)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("eigenvalue derivative matches the Hellmann-Feynman value") {
  Rng rng(42);
  const Matrix a = random_hermitian(12, rng);
  const Matrix b = random_hermitian(12, rng);
  const Spectrum s = eigensolve(a, true);
  const double h = 1e-6;
  const Spectrum sp = eigensolve(Matrix(a + h * b), false);
  const Spectrum sm = eigensolve(Matrix(a - h * b), false);
  for (Eigen::Index i = 0; i < 12; ++i) {
    const double fd = (sp.eigenvalues(i) - sm.eigenvalues(i)) / (2.0 * h);
    const double hf = s.eigenvectors->col(i).dot(b * s.eigenvectors->col(i)).real();
    CHECK(fd == doctest::Approx(hf).epsilon(1e-6));
  }
}

TEST_CASE("log-spaced grid") {
  const auto t = log_spaced(1e-4, 1.0, 5);
  REQUIRE(t.size() == 5);
  CHECK(t.front() == doctest::Approx(1e-4));
  CHECK(t[2] == doctest::Approx(1e-2));
  CHECK(t.back() == doctest::Approx(1.0));
}
