#include "spectral_eta/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include "spectral_eta/error.hpp"
#include "spectral_eta/eta_zeta.hpp"
#include "spectral_eta/flow_shift.hpp"
#include "spectral_eta/gluing.hpp"
#include "spectral_eta/models.hpp"

namespace spectral_eta {

namespace {

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

double signature_difference(const PairSpectra& p) { return (eta_direct(p.a1, 0.0) - eta_direct(p.a0, 0.0)).real(); }

struct Outcome {
  bool passed = false;
  std::string detail;
};

// Shared between the Example reproduction and the mod 2Z check.
struct ExampleData {
  EtaValue eta;
  FlowResult flow;
  double identity_residual = 0.0;
  double even_ratio = 0.0;
  double literal_sup = 0.0;
  int points = 0;
};

class Suite {
 public:
  explicit Suite(const AcceptanceOptions& o) : quick_(o.quick) {}

  Outcome signature_oracle() {
    Rng rng(1001);
    const int pairs = quick_ ? 10 : 50;
    double worst_closed = 0.0;
    double worst_quad = 0.0;
    EtaConfig closed;
    EtaConfig quad;
    quad.tail = TailMode::quadrature;
    for (int i = 0; i < pairs; ++i) {
      const int n = 20 + (180 * i) / std::max(1, pairs - 1);
      const PairSpectra ps = eigensolve(random_block_pair(n, std::max(2, n / 5), rng), false);
      const double oracle = signature_difference(ps);
      worst_closed = std::max(worst_closed, std::abs(relative_eta_invariant(ps, 1, closed).finite_part - oracle));
      worst_quad = std::max(worst_quad, std::abs(relative_eta_invariant(ps, 1, quad).finite_part - oracle));
    }
    return {worst_closed < 1e-8 && worst_quad < 1e-4,
            std::to_string(pairs) + " pairs N<=200: closed-form " + sci(worst_closed) + " (tol 1e-08), quadrature " +
                sci(worst_quad) + " (tol 1e-04)"};
  }

  Outcome sf_identity() {
    Rng rng(2002);
    const int paths = quick_ ? 5 : 20;
    int mismatches = 0;
    double worst = 0.0;
    int nonzero = 0;
    SfIdentityOptions opt;
    opt.r_grid = chebyshev_grid(9);
    for (int i = 0; i < paths; ++i) {
      const OperatorPath path = random_block_path(40, 10, rng, 1e-3);
      const SfIdentityReport r = sf_eta_identity(path, opt);
      worst = std::max(worst, r.residual);
      if (std::lround(r.xi) != r.flow.sf || r.residual > 1e-8) ++mismatches;
      if (r.flow.sf != 0) ++nonzero;
    }
    return {mismatches == 0, std::to_string(paths) + " paths, " + std::to_string(nonzero) + " with sf != 0: max |xi - sf| " +
                                 sci(worst) + ", integer mismatches " + std::to_string(mismatches)};
  }

  const ExampleData& example() {
    if (example_) return *example_;
    ExampleData d;
    d.points = quick_ ? 16 : 32;
    const ExampleR2 e = ExampleR2::standard(d.points, 8.0);
    const OperatorPath path = e.path();
    const PairSpectra ps{eigensolve(path.start(), false), eigensolve(path.end(), false)};
    EtaConfig cfg;
    cfg.fit.units = WindowUnits::spectral;
    d.eta = relative_eta_invariant(ps, 2, cfg);
    FlowOptions fo;
    fo.initial_steps = 8;
    d.flow = spectral_flow(path, fo);
    d.identity_residual =
        std::abs(d.eta.finite_part - (2.0 * d.flow.sf - d.eta.kernel_dim_a1 + d.eta.kernel_dim_a0));

    const Spectrum mid = eigensolve(path.at(0.5), true);
    const ExponentialSum literal = variation_terms(mid, path.derivative(0.5));
    double scale = 0.0;
    for (double c : literal.coeff) scale += std::abs(c);
    const double rho = mid.spectral_radius();
    for (double t : log_spaced(1e-3 / (rho * rho), 1.0, 30)) d.literal_sup = std::max(d.literal_sup, std::abs(literal(t)));
    if (scale > 0.0) d.literal_sup /= scale;

    Profile w;
    w.form = Profile::Form::bump;
    w.amplitude = 0.8;
    w.center = {2.0, 2.0};
    w.width = 1.0;
    const OperatorPath augmented(path.base(), Potential::diagonal(w.sample(e.grid), e.patch.sample(e.grid)));
    FitConfig vfit;
    vfit.mode = FitMode::least_squares;
    vfit.units = WindowUnits::spectral;
    vfit.t_lo = 1e-3;
    vfit.t_cut = 0.1;
    vfit.K = 9;
    const AsymptoticFit fit = variation_coefficient(augmented, 0.5, vfit, 2);
    std::vector<double> scaled(fit.coeffs.size());
    double top = 0.0;
    for (std::size_t k = 0; k < scaled.size(); ++k) {
      scaled[k] = std::abs(fit.coeffs[k]) * std::pow(fit.t_cut, fit.exponent(static_cast<int>(k)));
      top = std::max(top, scaled[k]);
    }
    double lead = 0.0;
    for (std::size_t k = 1; k < scaled.size() && lead == 0.0; k += 2)
      if (scaled[k] > 1e-6 * top) lead = scaled[k];
    double even = 0.0;
    for (std::size_t k = 0; k < scaled.size(); k += 2) even = std::max(even, scaled[k]);
    d.even_ratio = lead > 0.0 ? even / lead : std::numeric_limits<double>::infinity();
    example_ = d;
    return *example_;
  }

  Outcome example_reproduction() {
    const ExampleData& d = example();
    const bool ok = d.identity_residual < 1e-6 && d.even_ratio < 1e-2;
    return {ok, std::to_string(d.points) + "^2 grid: eta0 " + sci(d.eta.finite_part) + ", sf " +
                    std::to_string(d.flow.sf) + ", |eta0 - (2sf - k1 + k0)| " + sci(d.identity_residual) +
                    " (tol 1e-06); even/odd coefficient ratio " + sci(d.even_ratio) +
                    " (tol 1e-02, scalar-augmented patch); literal-path integrand " + sci(d.literal_sup)};
  }

  Outcome krein() {
    Rng rng(4004);
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
      const int n = 30 + 3 * i;
      const PairSpectra ps = eigensolve(random_block_pair(n, 8, rng), false);
      const double lo = std::min(ps.a0.eigenvalues.minCoeff(), ps.a1.eigenvalues.minCoeff());
      const double hi = std::max(ps.a0.eigenvalues.maxCoeff(), ps.a1.eigenvalues.maxCoeff());
      const double c = 0.5 * (lo + hi);
      const double rad = 0.55 * (hi - lo) + 0.1;
      for (const TestFunction& phi : {TestFunction::bump(c, rad), TestFunction::polynomial_bump(c, rad, 4),
                                      TestFunction::modulated_bump(c, rad, 3.0)})
        worst = std::max(worst, krein_check(ps, phi).residual);
    }
    return {worst < 1e-10, "10 pairs x 3 test functions: max residual " + sci(worst) + " (tol 1e-10)"};
  }

  Outcome ssf_near_zero() {
    Rng rng(5005);
    int bad = 0;
    std::ostringstream kinds;
    for (int i = 0; i < 10; ++i) {
      const int k0 = i % 4;
      const int k1 = (i + i / 4) % 3;
      const PairSpectra ps = eigensolve(random_kernel_pair(30, k0, k1, rng), false);
      const SpectralShift s = spectral_shift(ps, ShiftNormalization::gap_anchored);
      if (kernel_dim(ps.a0) != k0 || kernel_dim(ps.a1) != k1 || s.near_zero_value() != k0 - k1) ++bad;
      kinds << (i ? " " : "") << k0 - k1;
    }
    return {bad == 0, "10 kernel pairs, sigma on (0, delta) = k0 - k1 in {" + kinds.str() + "}: " + std::to_string(bad) +
                          " mismatches"};
  }

  Outcome decay() {
    Rng rng(6006);
    double worst_half_gap = std::numeric_limits<double>::infinity();
    double worst_matrix = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 10; ++i) {
      const PairSpectra ps = eigensolve(random_block_pair(40, 8, rng, 1e-3), false);
      const DecayResult d = decay_check(ps);
      worst_half_gap = std::min(worst_half_gap, d.rate / d.half_gap_bound);
      worst_matrix = std::min(worst_matrix, d.rate / d.matrix_rate);
    }
    return {worst_half_gap >= 1.0 && worst_matrix >= 0.9,
            "10 pairs: min rate/(delta^2/2) " + sci(worst_half_gap) + " (>= 1), min rate/delta^2 " + sci(worst_matrix) +
                " (>= 0.9)"};
  }

  Outcome additivity() {
    Rng rng(7007);
    const std::vector<Complex> s = {0.0, 2.0, Complex(4.0, 0.5)};
    double worst_add = 0.0;
    double worst_anti = 0.0;
    for (int i = 0; i < 10; ++i) {
      const auto ops = random_block_triple(40, 8, rng, 0.2);
      worst_add = std::max(worst_add, additivity_check(ops[0], ops[1], ops[2], s));
      const Spectrum s0 = eigensolve(ops[0], false);
      const Spectrum s1 = eigensolve(ops[1], false);
      const PairSpectra fwd{s0, s1};
      const PairSpectra rev{s1, s0};
      worst_anti = std::max(worst_anti, std::abs(relative_eta_invariant(fwd, 1).finite_part +
                                                 relative_eta_invariant(rev, 1).finite_part));
      for (Complex z : s)
        if (z != Complex(0.0))
          worst_anti = std::max(worst_anti, std::abs(relative_eta_function(fwd, z, 1) + relative_eta_function(rev, z, 1)));
    }
    return {worst_add < 1e-8 && worst_anti < 1e-8, "10 triples, s in {0, 2, 4+0.5i}: additivity " + sci(worst_add) +
                                                       ", antisymmetry " + sci(worst_anti) + " (tol 1e-08)"};
  }

  Outcome theta_endpoints() {
    double worst_t = 0.0;
    double worst_a = 0.0;
    double worst_u = 0.0;
    for (int n : {128, 256}) {
      const CutModel m = CutModel::standard(n);
      const DiracOperator a = m.pair().a1;
      const ThetaBVP t = build_theta_bvp(a, m.cut, 0.25 * std::numbers::pi);
      worst_t = std::max(worst_t, multiset_distance(eigensolve(t.op, false).eigenvalues, eigensolve(a, false).eigenvalues));
      const ThetaBVP z = build_theta_bvp(a, m.cut, 0.0);
      worst_a = std::max(worst_a, multiset_distance(eigensolve(z.op, false).eigenvalues, aps_dual_union_spectrum(a, m.cut)));
      worst_u = std::max(worst_u, t.unitarity_defect());
    }
    return {worst_t < 1e-10 && worst_a < 1e-10, "N in {128, 256}: pi/4 vs uncut " + sci(worst_t) + ", 0 vs APS+dual " +
                                                    sci(worst_a) + " (tol 1e-10); unitarity defect " + sci(worst_u)};
  }

  Outcome theta_constancy() {
    std::vector<int> sizes = {128, 256, 512, 1024};
    if (quick_) sizes = {128, 256};
    std::vector<double> thetas;
    for (int j = 0; j <= 8; ++j) thetas.push_back(j * std::numbers::pi / 32.0);
    std::vector<double> sup;
    for (int n : sizes) {
      const CutModel m = CutModel::standard(n);
      const double h = m.grid.spacing;
      EtaConfig cfg;
      cfg.fit.mode = FitMode::least_squares;
      cfg.fit.t_lo = 4.0 * h * h;
      cfg.fit.t_cut = 0.25;
      cfg.fit.K = 8;
      sup.push_back(theta_xi_scan(m.pair(), m.cut, thetas, cfg).sup_variation);
    }
    bool ok = true;
    std::string curve;
    for (std::size_t i = 0; i < sup.size(); ++i) {
      curve += (i ? ", " : "") + std::to_string(sizes[i]) + ": " + sci(sup[i]);
      if (sup[i] >= 1e-3) ok = false;
      if (i > 0 && !(sup[i] < sup[i - 1])) ok = false;
    }
    return {ok, "sup |xi_bar(theta) - xi_bar(pi/4)| over 9 thetas, N -> " + curve +
                    " (strictly decreasing, each < 1e-03)"};
  }

  Outcome gluing() {
    std::vector<double> res;
    std::vector<int> sizes = {512, 1024};
    if (quick_) sizes = {128, 256};
    for (int n : sizes) {
      const CutModel m = CutModel::standard(n);
      EtaConfig cfg;
      cfg.fit.units = WindowUnits::spectral;
      res.push_back(gluing_check(m.pair(), m.cut, cfg).residual);
    }
    constexpr double kFloor = 1e-12;
    const bool decreasing = res[1] < res[0] || (res[0] <= kFloor && res[1] <= kFloor);
    return {res[0] < 0.05 && decreasing, "residual mod Z at N = " + std::to_string(sizes[0]) + ": " + sci(res[0]) +
                                             " (tol 5e-02), N = " + std::to_string(sizes[1]) + ": " + sci(res[1]) +
                                             (res[1] <= kFloor ? " (both at the roundoff floor)" : "")};
  }

  Outcome mod2z() {
    const ExampleData& d = example();
    double worst = distance_to_lattice(
        d.eta.finite_part - (2.0 * d.flow.sf - d.eta.kernel_dim_a1 + d.eta.kernel_dim_a0), 2.0);
    const double example_res = worst;
    Rng rng(1111);
    const int pairs = quick_ ? 5 : 20;
    for (int i = 0; i < pairs; ++i) {
      const OperatorPath path = random_block_path(40, 8, rng, 1e-3);
      worst = std::max(worst, mod2z_check(make_pair(DiracOperator::raw(path.start()), DiracOperator::raw(path.end())))
                                  .residual_mod2);
    }
    return {worst < 1e-8, "Example pair " + sci(example_res) + ", " + std::to_string(pairs) + " random pairs: max " +
                              sci(worst) + " (tol 1e-08)"};
  }

  Outcome residue() {
    Rng rng(1212);
    double exact = 0.0;
    double ls = 0.0;
    EtaConfig lsc;
    lsc.fit.mode = FitMode::least_squares;
    lsc.fit.units = WindowUnits::spectral;
    lsc.residue_tol = 1e-3;
    for (int i = 0; i < 10; ++i) {
      const PairSpectra ps = eigensolve(random_block_pair(40 + 6 * i, 10, rng), false);
      exact = std::max(exact, std::abs(relative_eta_invariant(ps, 1).residue));
      ls = std::max(ls, std::abs(relative_eta_invariant(ps, 1, lsc).residue));
    }
    return {exact == 0.0 && ls < 1e-3,
            "10 pairs: exact-taylor |residue| " + sci(exact) + " (== 0), least-squares " + sci(ls) + " (tol 1e-03)"};
  }

 private:
  bool quick_;
  std::optional<ExampleData> example_;
};

struct Criterion {
  int id;
  const char* name;
  double limit;
  Outcome (Suite::*run)();
};

}  // namespace

std::string format_line(const CriterionResult& r) {
  char head[96];
  std::snprintf(head, sizeof head, "%s  C%-2d %-22s ", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str());
  char tail[64];
  if (r.runtime_limit > 0.0)
    std::snprintf(tail, sizeof tail, "; %.1f s (limit %.0f s)", r.seconds, r.runtime_limit);
  else
    std::snprintf(tail, sizeof tail, "; %.1f s", r.seconds);
  return std::string(head) + r.detail + tail;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options, std::ostream& out) {
  const std::vector<Criterion> criteria = {
      {1, "signature-oracle", 60.0, &Suite::signature_oracle},
      {2, "sf-identity", 30.0, &Suite::sf_identity},
      {3, "example-r2", 600.0, &Suite::example_reproduction},
      {4, "krein-identity", 5.0, &Suite::krein},
      {5, "ssf-near-zero", 0.0, &Suite::ssf_near_zero},
      {6, "large-time-decay", 0.0, &Suite::decay},
      {7, "additivity", 0.0, &Suite::additivity},
      {8, "theta-endpoints", 0.0, &Suite::theta_endpoints},
      {9, "xi-bar-constancy", 0.0, &Suite::theta_constancy},
      {10, "gluing-mod-z", 300.0, &Suite::gluing},
      {11, "mod-2z", 0.0, &Suite::mod2z},
      {12, "residue-formula", 0.0, &Suite::residue},
  };
  Suite suite(options);
  std::vector<CriterionResult> results;
  for (const Criterion& c : criteria) {
    if (!options.only.empty() && !options.only.count(c.id)) continue;
    CriterionResult r;
    r.id = c.id;
    r.name = c.name;
    r.runtime_limit = c.limit;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const Outcome o = (suite.*c.run)();
      r.passed = o.passed;
      r.detail = o.detail;
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (r.runtime_limit > 0.0 && r.seconds > r.runtime_limit) r.passed = false;
    out << format_line(r) << std::endl;
    results.push_back(r);
  }
  return results;
}

}  // namespace spectral_eta
