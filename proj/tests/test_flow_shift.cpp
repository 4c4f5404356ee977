#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "spectral_eta/error.hpp"
#include "spectral_eta/flow_shift.hpp"
#include "spectral_eta/models.hpp"

using namespace spectral_eta;

namespace {

Matrix diag(std::initializer_list<double> d) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double x : d) v(i++) = x;
  return v.asDiagonal();
}

PairSpectra spectra(std::vector<double> e0, std::vector<double> e1) {
  return {Spectrum::from_values(std::move(e0)), Spectrum::from_values(std::move(e1))};
}

}  // namespace

TEST_CASE("single eigenvalue crossing at r = 1/2") {
  const OperatorPath path(DiracOperator::raw(diag({-1.0})), diag({2.0}));
  const FlowResult f = spectral_flow(path);
  CHECK(f.sf == 1);
  CHECK(f.n_minus_start == 1);
  CHECK(f.n_minus_end == 0);
  REQUIRE(f.crossings.size() == 1);
  CHECK(f.crossings[0].r == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(f.crossings[0].direction == 1);

  const OperatorPath back(DiracOperator::raw(diag({1.0})), diag({-2.0}));
  CHECK(spectral_flow(back).sf == -1);
}

TEST_CASE("flow equals the change in negative count") {
  Rng rng(3);
  for (int i = 0; i < 5; ++i) {
    const OperatorPath path = random_block_path(20, 6, rng, 1e-3);
    const FlowResult f = spectral_flow(path);
    CHECK(f.sf == eigensolve(path.start(), false).negative_count() - eigensolve(path.end(), false).negative_count());
    int net = 0;
    for (const Crossing& c : f.crossings) net += c.direction;
    CHECK(net == f.sf);
  }
}

TEST_CASE("flow is additive under concatenation") {
  Rng rng(8);
  const OperatorPath path = random_block_path(16, 6, rng, 1e-3);
  const int whole = spectral_flow(path).sf;
  CHECK(spectral_flow(path.subpath(0.0, 0.37)).sf + spectral_flow(path.subpath(0.37, 1.0)).sf == whole);
}

TEST_CASE("counting spectral shift") {
  const SpectralShift s = spectral_shift(spectra({-1.0, 2.0}, {-1.0, 3.0}));
  CHECK(s.value_at(-5.0) == 0);
  CHECK(s.value_at(0.0) == 0);
  CHECK(s.value_at(2.5) == 1);
  CHECK(s.value_at(4.0) == 0);

  const SpectralShift down = spectral_shift(spectra({1.0}, {-1.0}));
  CHECK(down.value_at(0.0) == -1);
  CHECK(down.value_at(-2.0) == 0);
  CHECK(down.value_at(2.0) == 0);
}

TEST_CASE("gap-anchored shift near zero is the kernel difference") {
  const PairSpectra p = spectra({0.0, 2.0}, {1.0, 2.0});
  CHECK(spectral_shift(p, ShiftNormalization::gap_anchored).near_zero_value() == 1);
  const PairSpectra q = spectra({-1.0, 3.0, 4.0}, {0.0, 0.0, 4.0});
  CHECK(spectral_shift(q, ShiftNormalization::gap_anchored).near_zero_value() == -2);
  const PairSpectra r = spectra({-3.0, 1.5}, {-0.5, 2.0});
  const SpectralShift g = spectral_shift(r, ShiftNormalization::gap_anchored);
  CHECK(g.value_at(-0.25) == 0);
  CHECK(g.near_zero_value() == 0);
}

TEST_CASE("Krein trace formula") {
  Rng rng(21);
  const PairSpectra p = eigensolve(random_block_pair(20, 5, rng), false);
  const double lo = std::min(p.a0.eigenvalues.minCoeff(), p.a1.eigenvalues.minCoeff());
  const double hi = std::max(p.a0.eigenvalues.maxCoeff(), p.a1.eigenvalues.maxCoeff());
  const double c = 0.5 * (lo + hi);
  const double rad = 0.5 * (hi - lo) + 0.5;
  for (const TestFunction& phi : {TestFunction::bump(c, rad), TestFunction::polynomial_bump(c, rad, 4),
                                  TestFunction::modulated_bump(c, rad, 3.0)}) {
    const KreinResult k = krein_check(p, phi);
    CHECK(k.residual < 1e-12);
    CHECK(k.trace_difference == doctest::Approx(k.shift_integral));
  }
  try {
    krein_check(p, TestFunction::bump(c, 0.1));
    FAIL("expected SupportTooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::support_too_small);
  }
}

TEST_CASE("large-time decay") {
  const DecayResult d = decay_check(spectra({-1.0}, {1.0}));
  CHECK(d.delta == doctest::Approx(1.0));
  CHECK(d.rate == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(d.intercept == doctest::Approx(std::log(2.0)).epsilon(1e-10));
  CHECK(d.rate >= d.half_gap_bound);

  try {
    decay_check(spectra({1.0}, {1.0}));
    FAIL("expected NoSignal");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::no_signal);
  }
}

TEST_CASE("sf identity on random paths") {
  Rng rng(17);
  for (int i = 0; i < 3; ++i) {
    const OperatorPath path = random_block_path(24, 6, rng, 1e-3);
    SfIdentityOptions opts;
    opts.r_grid = chebyshev_grid(9);
    const SfIdentityReport rep = sf_eta_identity(path, opts);
    CHECK(rep.residual < 1e-6);
    CHECK(rep.eta_identity_residual < 1e-8);
    CHECK(std::abs(rep.variation_integral) < 1e-6);
  }
}

TEST_CASE("variation formula pointwise") {
  Rng rng(19);
  const OperatorPath path = random_block_path(16, 4, rng, 1e-3);
  const VariationResult v = variation_check(path, chebyshev_grid(5), EtaConfig{});
  REQUIRE(v.points.size() == 5);
  CHECK(v.max_residual < 1e-6);
}

TEST_CASE("Chebyshev grid") {
  const auto g = chebyshev_grid(5);
  REQUIRE(g.size() == 5);
  CHECK(g.front() == doctest::Approx(0.0));
  CHECK(g.back() == doctest::Approx(1.0));
  CHECK(g[2] == doctest::Approx(0.5));
}
