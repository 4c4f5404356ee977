#include "spectral_eta/flow_shift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "spectral_eta/error.hpp"
#include "spectral_eta/parallel.hpp"

namespace spectral_eta {

namespace {

const double kSqrtPi = std::sqrt(std::numbers::pi);

struct Sample {
  double r;
  Eigen::VectorXd ev;
  double thr;
};

int count_negative(const Sample& s) {
  return static_cast<int>(std::count_if(s.ev.begin(), s.ev.end(), [&](double l) { return l <= -s.thr; }));
}

class Tracker {
 public:
  Tracker(const OperatorPath& path, const FlowOptions& options) : path_(path), options_(options) {
    if (options.initial_steps < 1 || options.refine_factor < 2)
      throw Error(Errc::config_error, "initial_steps ≥ 1 and refine_factor ≥ 2 required");
    min_width_ = 1.0 / static_cast<double>(options.max_steps);
    result_.min_matching_gap = std::numeric_limits<double>::infinity();
  }

  FlowResult run() {
    Sample left = sample(0.0);
    result_.n_minus_start = count_negative(left);
    record(left);
    const int n = options_.initial_steps;
    for (int j = 1; j <= n; ++j) {
      Sample right = sample(static_cast<double>(j) / n);
      advance(left, right);
      left = std::move(right);
    }
    result_.n_minus_end = count_negative(left);
    if (!std::isfinite(result_.min_matching_gap)) result_.min_matching_gap = 0.0;
    return std::move(result_);
  }

 private:
  Sample sample(double r) {
    ++result_.steps_used;
    Spectrum s = eigensolve(path_.at(r), false, options_.kernel_tol);
    return Sample{r, std::move(s.eigenvalues), s.kernel_threshold()};
  }

  void record(const Sample& s) {
    if (!options_.record) return;
    result_.r_samples.push_back(s.r);
    result_.spectra.push_back(s.ev);
  }

  // Sorted-order matching is trusted when every eigenvalue that could reach
  // zero moves less than a third of the distance to its nearest distinct neighbour.
  bool matched(const Sample& a, const Sample& b, double* min_gap) const {
    const Eigen::Index m = a.ev.size();
    const Eigen::VectorXd drift = (b.ev - a.ev).cwiseAbs();
    const double reach = 2.0 * (m ? drift.maxCoeff() : 0.0) + std::max(a.thr, b.thr);
    const double distinct = std::max(a.thr, b.thr);
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) {
      if (std::min(std::abs(a.ev(i)), std::abs(b.ev(i))) > reach) continue;
      double spacing = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = i - 1; j >= 0; --j)
        if (a.ev(i) - a.ev(j) > distinct) {
          spacing = a.ev(i) - a.ev(j);
          break;
        }
      for (Eigen::Index j = i + 1; j < m; ++j)
        if (a.ev(j) - a.ev(i) > distinct) {
          spacing = std::min(spacing, a.ev(j) - a.ev(i));
          break;
        }
      if (!(drift(i) < spacing / 3.0)) return false;
      gap = std::min(gap, spacing);
    }
    *min_gap = gap;
    return true;
  }

  void advance(const Sample& a, const Sample& b) {
    double gap = 0.0;
    if (matched(a, b, &gap)) {
      accept(a, b, gap);
      return;
    }
    const double width = b.r - a.r;
    if (width / options_.refine_factor < min_width_ || result_.steps_used >= options_.max_steps)
      throw Error(Errc::tracking_failed, "eigenvalue matching still ambiguous near r = " + std::to_string(a.r) +
                                             " at the maximal refinement");
    Sample left = a;
    for (int k = 1; k <= options_.refine_factor; ++k) {
      Sample mid = k == options_.refine_factor ? b : sample(a.r + width * k / options_.refine_factor);
      advance(left, mid);
      left = std::move(mid);
    }
  }

  void accept(const Sample& a, const Sample& b, double gap) {
    result_.min_matching_gap = std::min(result_.min_matching_gap, gap);
    const int na = count_negative(a);
    const int nb = count_negative(b);
    const int direction = na > nb ? 1 : -1;
    for (int i = std::min(na, nb); i < std::max(na, nb); ++i) {
      const double la = a.ev(i);
      const double lb = b.ev(i);
      double r = 0.5 * (a.r + b.r);
      if (lb != la) r = std::clamp(a.r + (b.r - a.r) * (-la) / (lb - la), a.r, b.r);
      result_.crossings.push_back(Crossing{r, direction});
      result_.sf += direction;
    }
    record(b);
  }

  const OperatorPath& path_;
  FlowOptions options_;
  double min_width_;
  FlowResult result_;
};

std::vector<double> snapped(const Spectrum& s, bool snap) {
  std::vector<double> out(s.eigenvalues.begin(), s.eigenvalues.end());
  if (snap)
    for (double& l : out)
      if (s.is_kernel(l)) l = 0.0;
  std::sort(out.begin(), out.end());
  return out;
}

int count_le(const std::vector<double>& v, double x) {
  return static_cast<int>(std::upper_bound(v.begin(), v.end(), x) - v.begin());
}

SpectralShift build_shift(const PairSpectra& pair, ShiftNormalization normalization, bool snap) {
  const std::vector<double> e0 = snapped(pair.a0, snap);
  const std::vector<double> e1 = snapped(pair.a1, snap);
  SpectralShift s;
  s.normalization = normalization;
  s.breakpoints = e0;
  s.breakpoints.insert(s.breakpoints.end(), e1.begin(), e1.end());
  std::sort(s.breakpoints.begin(), s.breakpoints.end());
  s.breakpoints.erase(std::unique(s.breakpoints.begin(), s.breakpoints.end()), s.breakpoints.end());

  s.delta = std::numeric_limits<double>::infinity();
  for (const Spectrum* sp : {&pair.a0, &pair.a1})
    for (double l : sp->eigenvalues)
      if (!sp->is_kernel(l)) s.delta = std::min(s.delta, std::abs(l));

  s.values.resize(s.breakpoints.size() + 1);
  s.values[0] = 0;
  for (std::size_t j = 1; j < s.values.size(); ++j) {
    const double x = s.breakpoints[j - 1];
    s.values[j] = count_le(e0, x) - count_le(e1, x);
  }
  if (normalization == ShiftNormalization::gap_anchored) {
    const int offset = s.value_at(-0.5 * std::min(s.delta, 1.0));
    for (int& v : s.values) v -= offset;
  }
  return s;
}

}  // namespace

FlowResult spectral_flow(const OperatorPath& path, const FlowOptions& options) {
  return Tracker(path, options).run();
}

int SpectralShift::value_at(double lambda) const {
  const auto j = std::upper_bound(breakpoints.begin(), breakpoints.end(), lambda) - breakpoints.begin();
  return values[static_cast<std::size_t>(j)];
}

int SpectralShift::near_zero_value() const { return value_at(0.5 * std::min(delta, 1.0)); }

SpectralShift spectral_shift(const PairSpectra& pair, ShiftNormalization normalization) {
  return build_shift(pair, normalization, true);
}

TestFunction TestFunction::bump(double center, double radius) {
  auto phi = [=](double l) {
    const double x = (l - center) / radius;
    return std::abs(x) < 1.0 ? std::exp(-1.0 / (1.0 - x * x)) : 0.0;
  };
  auto dphi = [=](double l) {
    const double x = (l - center) / radius;
    if (std::abs(x) >= 1.0) return 0.0;
    const double q = 1.0 - x * x;
    return std::exp(-1.0 / q) * (-2.0 * x / (q * q)) / radius;
  };
  return {phi, dphi, center - radius, center + radius};
}

TestFunction TestFunction::polynomial_bump(double center, double radius, int p) {
  auto phi = [=](double l) {
    const double x = (l - center) / radius;
    return std::abs(x) < 1.0 ? std::pow(1.0 - x * x, p) : 0.0;
  };
  auto dphi = [=](double l) {
    const double x = (l - center) / radius;
    return std::abs(x) < 1.0 ? -2.0 * p * x * std::pow(1.0 - x * x, p - 1) / radius : 0.0;
  };
  return {phi, dphi, center - radius, center + radius};
}

TestFunction TestFunction::modulated_bump(double center, double radius, double omega) {
  const TestFunction b = bump(center, radius);
  auto phi = [=](double l) { return std::sin(omega * l) * b.phi(l); };
  auto dphi = [=](double l) { return omega * std::cos(omega * l) * b.phi(l) + std::sin(omega * l) * b.dphi(l); };
  return {phi, dphi, b.lo, b.hi};
}

KreinResult krein_check(const PairSpectra& pair, const TestFunction& phi) {
  for (const Spectrum* s : {&pair.a0, &pair.a1})
    if (s->eigenvalues.size() > 0 &&
        (s->eigenvalues.minCoeff() <= phi.lo || s->eigenvalues.maxCoeff() >= phi.hi))
      throw Error(Errc::support_too_small, "test function support does not cover both spectra");
  KreinResult k;
  for (double l : pair.a1.eigenvalues) k.trace_difference += phi.phi(l);
  for (double l : pair.a0.eigenvalues) k.trace_difference -= phi.phi(l);

  // σ is piecewise constant, so ∫φ′σ is a sum of φ increments.
  const SpectralShift s = build_shift(pair, ShiftNormalization::counting, false);
  double left = phi.lo;
  for (std::size_t j = 0; j < s.values.size(); ++j) {
    const double right = j < s.breakpoints.size() ? s.breakpoints[j] : phi.hi;
    k.shift_integral += s.values[j] * (phi.phi(right) - phi.phi(left));
    left = right;
  }
  k.residual = std::abs(k.trace_difference - k.shift_integral);
  return k;
}

DecayResult decay_check(const PairSpectra& pair, double t_lo, double t_hi, int samples) {
  DecayResult d;
  d.delta = spectral_gap(pair);
  d.half_gap_bound = 0.5 * d.delta * d.delta;
  d.matrix_rate = d.delta * d.delta;
  if (t_lo <= 0.0) t_lo = 2.0 / d.matrix_rate;
  if (t_hi <= 0.0) t_hi = 20.0 / d.matrix_rate;
  const ExponentialSum h = eta_terms(pair);

  bool signal = false;
  for (double t : log_spaced(t_lo, t_hi, samples)) {
    double value = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < h.lambda.size(); ++i) {
      const double term = h.coeff[i] * std::exp(-t * h.lambda[i] * h.lambda[i]);
      value += term;
      scale += std::abs(term);
    }
    if (std::abs(value) <= 1e-12 * scale || value == 0.0) continue;
    signal = true;
    d.t.push_back(t);
    d.log_abs_trace.push_back(std::log(std::abs(value)));
  }
  if (!signal || d.t.size() < 2) throw Error(Errc::no_signal, "relative weighted trace vanishes on the range");

  const auto m = static_cast<Eigen::Index>(d.t.size());
  Eigen::MatrixXd a(m, 2);
  Eigen::VectorXd y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = d.t[i];
    y(i) = d.log_abs_trace[i];
  }
  const Eigen::Vector2d c = a.colPivHouseholderQr().solve(y);
  d.intercept = c(0);
  d.rate = -c(1);
  return d;
}

AsymptoticFit variation_coefficient(const OperatorPath& path, double r, const FitConfig& config, int n) {
  const Spectrum s = eigensolve(path.at(r), true);
  return fit_short_time(variation_terms(s, path.derivative(r)), ExpansionKind::variation, n, config);
}

std::vector<double> chebyshev_grid(int count) {
  std::vector<double> r(static_cast<std::size_t>(std::max(count, 2)));
  const int m = static_cast<int>(r.size()) - 1;
  for (int j = 0; j <= m; ++j) r[j] = 0.5 * (1.0 - std::cos(std::numbers::pi * j / m));
  r.front() = 0.0;
  r.back() = 1.0;
  return r;
}

VariationResult variation_check(const OperatorPath& path, const std::vector<double>& r_grid,
                                const EtaConfig& config, double stencil) {
  const int n = path.base().manifold_dim;
  const Spectrum base = eigensolve(path.start(), false);
  VariationResult out;
  out.points.resize(r_grid.size());

  parallel_for(r_grid.size(), [&](std::size_t idx) {
    VariationPoint& p = out.points[idx];
    p.r = r_grid[idx];
    const Spectrum centre = eigensolve(path.at(p.r), true);
    p.fit = fit_short_time(variation_terms(centre, path.derivative(p.r)), ExpansionKind::variation, n,
                           config.fit);
    p.c_n = p.fit.coeffs[n];

    auto same_signs = [&](const Spectrum& s) {
      return s.negative_count() == centre.negative_count() && kernel_dim(s) == kernel_dim(centre);
    };
    double h = stencil;
    for (int attempt = 0; attempt < 30; ++attempt, h *= 0.5) {
      const double lo = std::max(0.0, p.r - h);
      const double hi = std::min(1.0, p.r + h);
      const Spectrum sl = eigensolve(path.at(lo), false);
      const Spectrum sh = eigensolve(path.at(hi), false);
      if (!same_signs(sl) || !same_signs(sh)) continue;
      const double el = relative_eta_invariant(PairSpectra{base, sl}, n, config).finite_part;
      const double eh = relative_eta_invariant(PairSpectra{base, sh}, n, config).finite_part;
      p.eta_derivative = (eh - el) / (hi - lo);
      p.stencil = h;
      p.residual = std::abs(p.eta_derivative + 2.0 / kSqrtPi * p.c_n);
      return;
    }
    throw Error(Errc::stencil_straddles_crossing,
                "every stencil around r = " + std::to_string(p.r) + " straddles a zero crossing");
  });
  for (const auto& p : out.points) out.max_residual = std::max(out.max_residual, p.residual);
  return out;
}

SfIdentityReport sf_eta_identity(const OperatorPath& path, const SfIdentityOptions& options) {
  const int n = path.base().manifold_dim;
  SfIdentityReport rep;
  const PairSpectra ends{eigensolve(path.start(), false, options.flow.kernel_tol),
                         eigensolve(path.end(), false, options.flow.kernel_tol)};
  rep.eta = relative_eta_invariant(ends, n, options.eta);
  rep.xi = reduced_eta(rep.eta);
  rep.flow = spectral_flow(path, options.flow);

  rep.variation.resize(options.r_grid.size());
  parallel_for(options.r_grid.size(), [&](std::size_t i) {
    VariationPoint& p = rep.variation[i];
    p.r = options.r_grid[i];
    p.fit = variation_coefficient(path, p.r, options.variation_fit, n);
    p.c_n = p.fit.coeffs[n];
  });
  double integral = 0.0;
  for (std::size_t i = 1; i < rep.variation.size(); ++i)
    integral += 0.5 * (rep.variation[i].c_n + rep.variation[i - 1].c_n) *
                (rep.variation[i].r - rep.variation[i - 1].r);
  rep.variation_integral = -integral / kSqrtPi;

  rep.residual = std::abs(rep.xi - rep.variation_integral - rep.flow.sf);
  rep.eta_identity_residual =
      std::abs(rep.eta.finite_part - (2.0 * rep.flow.sf - rep.eta.kernel_dim_a1 + rep.eta.kernel_dim_a0));
  return rep;
}

}  // namespace spectral_eta
