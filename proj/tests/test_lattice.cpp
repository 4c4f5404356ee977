#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

#include "spectral_eta/error.hpp"
#include "spectral_eta/lattice.hpp"
#include "spectral_eta/spectrum.hpp"

using namespace spectral_eta;

namespace {

std::vector<double> sorted(const Eigen::VectorXd& v) {
  std::vector<double> out(v.data(), v.data() + v.size());
  std::sort(out.begin(), out.end());
  return out;
}

DiracOperator massive_line(int n, double h, double mass, Topology topo = Topology::periodic,
                           DerivativeScheme scheme = DerivativeScheme::central_difference) {
  const Grid g = Grid::centered(1, n, h, topo);
  return build_dirac_1d(g, Potential::sigma3(std::vector<double>(n, mass)), scheme);
}

}  // namespace

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(Grid::centered(3, 8, 1.0, Topology::periodic).validate(), Error);
  CHECK_THROWS_AS(Grid::centered(1, 2, 1.0, Topology::periodic).validate(), Error);
  CHECK_THROWS_AS(Grid::centered(2, 8, 1.0, Topology::half_line).validate(), Error);
  const Grid g = Grid::centered(2, 6, 0.5, Topology::periodic);
  CHECK(g.node_count() == 36);
  const auto ij = g.axis_indices(13);
  CHECK(ij[0] == 1);
  CHECK(ij[1] == 2);
}

TEST_CASE("free periodic operator has the lattice dispersion") {
  const int n = 16;
  const double h = 0.5;
  const DiracOperator a = massive_line(n, h, 0.0);
  CHECK(hermiticity_defect(a.matrix) < 1e-15);
  std::vector<double> expected;
  for (int j = 0; j < n; ++j) {
    const double s = std::sin(2.0 * std::numbers::pi * j / n) / h;
    expected.push_back(s);
    expected.push_back(-s);
  }
  std::sort(expected.begin(), expected.end());
  const auto got = sorted(eigensolve(a, false).eigenvalues);
  REQUIRE(got.size() == expected.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(expected[i]).epsilon(1e-12));
}

TEST_CASE("mass term lifts the dispersion to lambda^2 = xi^2 + 1") {
  const int n = 20;
  const double h = 0.4;
  const auto got = sorted(eigensolve(massive_line(n, h, 1.0, Topology::periodic, DerivativeScheme::spectral), false)
                              .eigenvalues);
  std::vector<double> expected;
  for (int j = -n / 2; j < n / 2; ++j) {
    const double xi = 2.0 * std::numbers::pi * j / (n * h);
    expected.push_back(std::sqrt(xi * xi + 1.0));
    expected.push_back(-std::sqrt(xi * xi + 1.0));
  }
  std::sort(expected.begin(), expected.end());
  REQUIRE(got.size() == expected.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(expected[i]).epsilon(1e-10));
}

TEST_CASE("sigma3 potential gives a spectrum symmetric about zero") {
  std::vector<double> v(24);
  for (int i = 0; i < 24; ++i) v[i] = std::tanh(0.3 * (i - 12));
  const Grid g = Grid::centered(1, 24, 0.5, Topology::truncated_line);
  const DiracOperator a = build_dirac_1d(g, Potential::sigma3(v), DerivativeScheme::central_difference);
  const Matrix s2 = Eigen::kroneckerProduct(Matrix::Identity(24, 24), sigma(2)).eval();
  CHECK((s2 * a.matrix * s2 + a.matrix).cwiseAbs().maxCoeff() < 1e-14);
  const auto ev = sorted(eigensolve(a, false).eigenvalues);
  for (std::size_t i = 0; i < ev.size(); ++i) CHECK(ev[i] == doctest::Approx(-ev[ev.size() - 1 - i]).epsilon(1e-10));
}

TEST_CASE("invalid potentials are rejected") {
  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(Potential(PotentialKind::matrix_valued, {bad}), Error);
  const std::vector<double> a(4, 0.0), b(5, 0.0);
  CHECK_THROWS_AS(Potential::diagonal(a, b), Error);
  const Grid g = Grid::centered(1, 8, 1.0, Topology::periodic);
  try {
    build_dirac_1d(g, Potential::sigma3(a), DerivativeScheme::central_difference);
    FAIL("expected InvalidPotential");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_potential);
  }
}

TEST_CASE("spectral differentiation requires a periodic grid") {
  const Grid g = Grid::centered(1, 8, 1.0, Topology::truncated_line);
  try {
    build_dirac_1d(g, Potential::sigma3(std::vector<double>(8, 1.0)), DerivativeScheme::spectral);
    FAIL("expected SchemeMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::scheme_mismatch);
  }
}

TEST_CASE("make_pair records the difference support") {
  const DiracOperator a0 = massive_line(16, 0.5, 1.0, Topology::truncated_line);
  std::vector<double> w(16, 0.0), v(16, 0.0);
  w[7] = 0.3;
  v[8] = -0.5;
  const OperatorPair p = make_pair(a0, Potential::diagonal(w, v));
  CHECK(p.diff_support == std::vector<int>{7, 8});
  CHECK(locality_defect(p) == 0.0);
  const OperatorPair q = make_pair(a0, p.a1);
  CHECK(q.diff_support == std::vector<int>{7, 8});

  std::vector<double> edge(16, 0.0);
  edge[0] = 1.0;
  try {
    make_pair(a0, Potential::sigma3(edge));
    FAIL("expected NotCompactlySupported");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::not_compactly_supported);
  }
  const DiracOperator ring = massive_line(8, 0.5, 1.0);
  CHECK_THROWS_AS(make_pair(ring, Potential::sigma3(std::vector<double>(8, 0.1))), Error);
}

TEST_CASE("operator path endpoints and derivative") {
  const DiracOperator a0 = massive_line(12, 0.5, 1.0, Topology::truncated_line);
  std::vector<double> v(12, 0.0);
  v[5] = -2.0;
  const Potential patch = Potential::sigma3(v);
  const OperatorPath path(a0, patch);
  CHECK((path.start() - a0.matrix).cwiseAbs().maxCoeff() == 0.0);
  CHECK((path.end() - make_pair(a0, patch).a1.matrix).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((path.derivative(0.3) - patch.as_matrix()).cwiseAbs().maxCoeff() == 0.0);
  const OperatorPath sub = path.subpath(0.25, 0.75);
  CHECK((sub.start() - path.at(0.25)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((sub.end() - path.at(0.75)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((sub.derivative(0.0) - 0.5 * patch.as_matrix()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("boundary operator at a product-type cut") {
  const DiracOperator a = massive_line(16, 0.5, 1.5, Topology::truncated_line);
  const BoundaryOperator b = restrict_to_boundary(a, 8);
  CHECK((b.matrix - 1.5 * sigma(2)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(b.min_abs_eigenvalue() == doctest::Approx(1.5));

  const DiracOperator massless = massive_line(16, 0.5, 0.0, Topology::truncated_line);
  try {
    restrict_to_boundary(massless, 8);
    FAIL("expected SingularBoundaryOperator");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::singular_boundary_operator);
  }
  CHECK_THROWS_AS(restrict_to_boundary(a, 1), Error);
}

TEST_CASE("APS half-line constraint for B = sigma2") {
  // ℬ = σ₂ on the right half: Π_{≥0} kills the +1 eigenvector, leaving (1, −i)/√2.
  const DiracOperator a = massive_line(16, 0.5, 1.0, Topology::truncated_line);
  const DiracOperator right = build_aps_halfline(a, 8, Side::right, false);
  REQUIRE(right.constraint_subspace.has_value());
  const Matrix& c = *right.constraint_subspace;
  REQUIRE(c.cols() == c.rows() - 1);
  Eigen::Vector2cd expected(1.0, Complex(0.0, -1.0));
  expected /= std::sqrt(2.0);
  const Eigen::Vector2cd kept = c.block(0, 0, 2, 1);
  CHECK(std::abs(std::abs(expected.dot(kept)) - 1.0) < 1e-12);
  CHECK((c.adjoint() * c - Matrix::Identity(c.cols(), c.cols())).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(hermiticity_defect(right.matrix) < 1e-14);
}
