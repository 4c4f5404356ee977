#include "spectral_eta/eta_zeta.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/expint.hpp>
#include <Eigen/SVD>

#include "spectral_eta/error.hpp"
#include "spectral_eta/special_functions.hpp"

namespace spectral_eta {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
constexpr unsigned kMaxDepth = 12;
const double kSqrtPi = std::sqrt(std::numbers::pi);

int kind_shift(ExpansionKind kind) { return kind == ExpansionKind::heat ? 0 : 1; }

int resolve_k(int n, int k) { return k < 0 ? n + 7 : k; }

// Highest m with n + shift + 2m ≤ K.
int taylor_order(ExpansionKind kind, int n, int K) {
  const int room = K - n - kind_shift(kind);
  return room < 0 ? -1 : room / 2;
}

// e^{−x} − Σ_{m≤M} (−x)^m/m!, without cancellation for small x.
double taylor_remainder(double x, int order) {
  if (x < 4.0) {
    double term = 1.0;
    for (int m = 1; m <= order; ++m) term *= -x / m;
    double sum = 0.0;
    for (int m = order + 1; m < order + 200; ++m) {
      term *= -x / m;
      sum += term;
      if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
  }
  double poly = 0.0;
  double term = 1.0;
  for (int m = 0; m <= order; ++m) {
    if (m > 0) term *= -x / m;
    poly += term;
  }
  return std::exp(-x) - poly;
}

struct Window {
  double t_lo;
  double t_cut;
};

Window resolve_window(const FitConfig& config, double radius) {
  if (!(config.t_cut > 0.0) || !(config.t_lo > 0.0) || config.t_lo >= config.t_cut)
    throw Error(Errc::invalid_time, "fit window must satisfy 0 < t_lo < t_cut");
  if (config.units == WindowUnits::absolute || radius <= 0.0) return {config.t_lo, config.t_cut};
  const double scale = 1.0 / (radius * radius);
  return {config.t_lo * scale, config.t_cut * scale};
}

// h − fit on (0, t_cut].
struct Remainder {
  const ExponentialSum& h;
  const AsymptoticFit& fit;
  int order;  // Taylor order in exact mode

  double operator()(double t) const {
    if (fit.mode == FitMode::least_squares) return h(t) - fit.evaluate(t);
    double acc = 0.0;
    for (std::size_t i = 0; i < h.lambda.size(); ++i)
      acc += h.coeff[i] * taylor_remainder(t * h.lambda[i] * h.lambda[i], order);
    return acc;
  }
};

struct Bracket {
  Complex fit_part;
  Complex remainder;
  Complex tail;
  double remainder_error = 0.0;
  double tail_error = 0.0;
};

// ∫_lo^{t_cut} t^w (h − fit) dt with t = u².
Complex remainder_integral(const Remainder& rem, Complex w, double lo, double t_cut, double tol, double* err) {
  const Complex p = 2.0 * w + 1.0;
  auto f = [&](double u) -> Complex {
    if (u <= 0.0) return 0.0;
    return 2.0 * std::exp(p * std::log(u)) * rem(u * u);
  };
  return GK::integrate(f, std::sqrt(lo), std::sqrt(t_cut), kMaxDepth, tol, err);
}

// ∫_{t_cut}^∞ t^w h dt.
Complex tail_integral(const ExponentialSum& h, Complex w, double t_cut, TailMode mode, double tol, double* err) {
  if (mode == TailMode::quadrature) {
    const Complex p = 2.0 * w + 1.0;
    auto f = [&](double u) -> Complex { return 2.0 * std::exp(p * std::log(u)) * h(u * u); };
    return GK::integrate(f, std::sqrt(t_cut), std::numeric_limits<double>::infinity(), kMaxDepth, tol, err);
  }
  *err = 0.0;
  const Complex a = w + 1.0;
  Complex acc = 0.0;
  for (std::size_t i = 0; i < h.lambda.size(); ++i) {
    const double l2 = h.lambda[i] * h.lambda[i];
    if (l2 == 0.0) continue;
    const Complex g = a == Complex(0.5) ? Complex(kSqrtPi * boost::math::erfc(std::sqrt(t_cut * l2)))
                                        : special::upper_gamma(a, t_cut * l2);
    acc += h.coeff[i] * std::exp(-a * std::log(l2)) * g;
  }
  return acc;
}

Bracket mellin_bracket(const ExponentialSum& h, const AsymptoticFit& fit, Complex s, const EtaConfig& config,
                       bool skip_n) {
  // Weight exponent w with w + 1 + exponent(k) = (s + k − n)/2 for both kinds.
  const Complex w = fit.kind == ExpansionKind::heat ? 0.5 * s - 1.0 : 0.5 * (s - 1.0);
  Bracket b;
  for (int k = 0; k <= fit.K; ++k) {
    const double bk = fit.coeffs[k];
    if (bk == 0.0 || (skip_n && k == fit.n)) continue;
    const Complex q = s + static_cast<double>(k - fit.n);
    b.fit_part += 2.0 * bk * std::exp(0.5 * q * std::log(fit.t_cut)) / q;
  }
  const Remainder rem{h, fit, taylor_order(fit.kind, fit.n, fit.K)};
  const double lo = fit.mode == FitMode::exact_taylor ? 0.0 : fit.t_lo;
  b.remainder = remainder_integral(rem, w, lo, fit.t_cut, config.quad_tol, &b.remainder_error);
  b.tail = tail_integral(h, w, fit.t_cut, config.tail, config.quad_tol, &b.tail_error);
  return b;
}

void check_poles(const AsymptoticFit& fit, Complex s, double distance) {
  for (double p : fit.poles())
    if (std::abs(s - p) < distance)
      throw Error(Errc::near_pole, "s lies within " + std::to_string(distance) + " of the pole at " +
                                       std::to_string(p));
}

double sup_residual(const ExponentialSum& h, const AsymptoticFit& fit, int samples) {
  const Remainder rem{h, fit, taylor_order(fit.kind, fit.n, fit.K)};
  const double lo = fit.t_lo > 0.0 ? fit.t_lo : fit.t_cut * 1e-4;
  double sup = 0.0;
  for (double t : log_spaced(lo, fit.t_cut, std::max(samples, 2))) sup = std::max(sup, std::abs(rem(t)));
  return sup;
}

TraceKind trace_kind(ExpansionKind kind) {
  switch (kind) {
    case ExpansionKind::eta: return TraceKind::relative_eta_weighted;
    case ExpansionKind::heat: return TraceKind::relative;
    case ExpansionKind::variation: return TraceKind::derivative_weighted;
  }
  return TraceKind::plain;
}

}  // namespace

double AsymptoticFit::exponent(int k) const { return 0.5 * (k - n - kind_shift(kind)); }

double AsymptoticFit::evaluate(double t) const {
  double acc = 0.0;
  for (int k = 0; k <= K; ++k)
    if (coeffs[k] != 0.0) acc += coeffs[k] * std::pow(t, exponent(k));
  return acc;
}

std::vector<double> AsymptoticFit::poles(double rel_threshold) const {
  double big = 0.0;
  for (double c : coeffs) big = std::max(big, std::abs(c));
  std::vector<double> out;
  if (big == 0.0) return out;
  for (int k = 0; k <= K; ++k)
    if (std::abs(coeffs[k]) > rel_threshold * big) out.push_back(static_cast<double>(n - k));
  std::sort(out.begin(), out.end());
  return out;
}

double ExponentialSum::operator()(double t) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < lambda.size(); ++i) acc += coeff[i] * std::exp(-t * lambda[i] * lambda[i]);
  return acc;
}

double ExponentialSum::moment(int m) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < lambda.size(); ++i) acc += coeff[i] * std::pow(lambda[i] * lambda[i], m);
  return acc;
}

double ExponentialSum::radius() const {
  double r = 0.0;
  for (double l : lambda) r = std::max(r, std::abs(l));
  return r;
}

ExponentialSum eta_terms(const PairSpectra& pair) {
  ExponentialSum h;
  auto add = [&h](const Spectrum& s, double sign) {
    for (double l : s.eigenvalues)
      if (!s.is_kernel(l)) {
        h.lambda.push_back(l);
        h.coeff.push_back(sign * l);
      }
  };
  add(pair.a1, 1.0);
  add(pair.a0, -1.0);
  return h;
}

ExponentialSum heat_terms(const PairSpectra& pair) {
  ExponentialSum h;
  auto add = [&h](const Spectrum& s, double sign) {
    for (double l : s.eigenvalues)
      if (!s.is_kernel(l)) {
        h.lambda.push_back(l);
        h.coeff.push_back(sign);
      }
  };
  add(pair.a1, 1.0);
  add(pair.a0, -1.0);
  return h;
}

ExponentialSum variation_terms(const Spectrum& s, const Matrix& derivative) {
  if (!s.eigenvectors) throw Error(Errc::config_error, "variation traces need eigenvectors");
  const Matrix& v = *s.eigenvectors;
  const Matrix dv = derivative * v;
  ExponentialSum h;
  h.lambda.assign(s.eigenvalues.begin(), s.eigenvalues.end());
  h.coeff.resize(h.lambda.size());
  for (Eigen::Index i = 0; i < v.cols(); ++i) h.coeff[i] = v.col(i).dot(dv.col(i)).real();
  return h;
}

AsymptoticFit fit_short_time(const HeatTraceSamples& samples, ExpansionKind kind, int n, int K) {
  K = resolve_k(n, K);
  const auto m = static_cast<Eigen::Index>(samples.t_grid.size());
  if (m < K + 1) throw Error(Errc::fit_unstable, "fewer samples than coefficients; shrink K");
  AsymptoticFit fit;
  fit.n = n;
  fit.K = K;
  fit.kind = kind;
  fit.mode = FitMode::least_squares;
  fit.t_lo = samples.t_grid.front();
  fit.t_cut = samples.t_grid.back();

  // Fit in τ = t / t_cut with unit-norm columns.
  Eigen::MatrixXd design(m, K + 1);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double tau = samples.t_grid[i] / fit.t_cut;
    for (int k = 0; k <= K; ++k) design(i, k) = std::pow(tau, fit.exponent(k));
    rhs(i) = samples.values[i];
  }
  const Eigen::VectorXd norms = design.colwise().norm();
  for (int k = 0; k <= K; ++k) design.col(k) /= norms(k);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  fit.condition = sv(0) / sv(sv.size() - 1);
  if (!(fit.condition <= 1e12))
    throw Error(Errc::fit_unstable, "design condition " + std::to_string(fit.condition) +
                                        " exceeds 1e12; shrink K or the fit window");
  const Eigen::VectorXd beta = svd.solve(rhs);
  fit.coeffs.resize(K + 1);
  for (int k = 0; k <= K; ++k) fit.coeffs[k] = beta(k) / norms(k) * std::pow(fit.t_cut, -fit.exponent(k));

  for (Eigen::Index i = 0; i < m; ++i)
    fit.residual = std::max(fit.residual, std::abs(samples.values[i] - fit.evaluate(samples.t_grid[i])));
  return fit;
}

AsymptoticFit fit_exact_taylor(std::span<const double> moments, ExpansionKind kind, int n, int K, double t_cut) {
  K = resolve_k(n, K);
  AsymptoticFit fit;
  fit.n = n;
  fit.K = K;
  fit.kind = kind;
  fit.mode = FitMode::exact_taylor;
  fit.t_cut = t_cut;
  fit.coeffs.assign(K + 1, 0.0);
  const int order = taylor_order(kind, n, K);
  double factorial = 1.0;
  for (int m = 0; m <= order && m < static_cast<int>(moments.size()); ++m) {
    if (m > 0) factorial *= m;
    fit.coeffs[n + kind_shift(kind) + 2 * m] = (m % 2 == 0 ? 1.0 : -1.0) * moments[m] / factorial;
  }
  return fit;
}

AsymptoticFit fit_short_time(const ExponentialSum& h, ExpansionKind kind, int n, const FitConfig& config) {
  const int K = resolve_k(n, config.K);
  const Window win = resolve_window(config, h.radius());
  if (config.mode == FitMode::exact_taylor) {
    std::vector<double> moments;
    for (int m = 0; m <= taylor_order(kind, n, K); ++m) moments.push_back(h.moment(m));
    AsymptoticFit fit = fit_exact_taylor(moments, kind, n, K, win.t_cut);
    fit.t_lo = win.t_lo;
    fit.residual = sup_residual(h, fit, config.samples);
    fit.t_lo = 0.0;
    return fit;
  }
  HeatTraceSamples samples;
  samples.kind = trace_kind(kind);
  samples.t_grid = log_spaced(win.t_lo, win.t_cut, config.samples);
  for (double t : samples.t_grid) samples.values.push_back(h(t));
  AsymptoticFit fit = fit_short_time(samples, kind, n, K);
  if (fit.condition > config.max_condition)
    throw Error(Errc::fit_unstable, "design condition " + std::to_string(fit.condition) +
                                        " exceeds the configured limit; shrink K or the fit window");
  return fit;
}

Complex eta_direct(const Spectrum& s, Complex z) {
  Complex acc = 0.0;
  for (double l : s.eigenvalues) {
    if (s.is_kernel(l)) continue;
    const double sign = l > 0.0 ? 1.0 : -1.0;
    acc += sign * std::exp(-z * std::log(std::abs(l)));
  }
  return acc;
}

double closed_form_tail(const Spectrum& s, double t_cut, bool weighted) {
  if (!(t_cut > 0.0)) throw Error(Errc::invalid_time, "t_cut must be positive");
  double acc = 0.0;
  for (double l : s.eigenvalues) {
    if (s.is_kernel(l)) continue;
    if (weighted)
      acc += (l > 0.0 ? 1.0 : -1.0) * kSqrtPi * boost::math::erfc(std::abs(l) * std::sqrt(t_cut));
    else
      acc += boost::math::expint(1, t_cut * l * l);
  }
  return acc;
}

Complex relative_eta_function(const PairSpectra& pair, Complex s, int n, const EtaConfig& config) {
  const ExponentialSum h = eta_terms(pair);
  const AsymptoticFit fit = fit_short_time(h, ExpansionKind::eta, n, config.fit);
  check_poles(fit, s, config.pole_distance);
  const Bracket b = mellin_bracket(h, fit, s, config, false);
  return special::rgamma(0.5 * (s + 1.0)) * (b.fit_part + b.remainder + b.tail);
}

Complex relative_eta_function(const OperatorPair& pair, Complex s, const EtaConfig& config) {
  return relative_eta_function(eigensolve(pair, false), s, pair.a0.manifold_dim, config);
}

EtaValue relative_eta_invariant(const PairSpectra& pair, int n, const EtaConfig& config) {
  const ExponentialSum h = eta_terms(pair);
  EtaValue e;
  e.kernel_dim_a0 = kernel_dim(pair.a0);
  e.kernel_dim_a1 = kernel_dim(pair.a1);
  e.fit = fit_short_time(h, ExpansionKind::eta, n, config.fit);
  const double bn = e.fit.coeffs[n];
  e.residue = 2.0 / kSqrtPi * bn;
  e.irregular_at_zero = std::abs(e.residue) > config.residue_tol;

  const Bracket b = mellin_bracket(h, e.fit, 0.0, config, true);
  double regular = (b.fit_part + b.remainder + b.tail).real();
  if (bn != 0.0) regular += bn * std::log(e.fit.t_cut);
  e.finite_part = (regular + (special::kEulerGamma + 2.0 * std::numbers::ln2) * bn) / kSqrtPi;

  e.diagnostics.fit_residual = e.fit.residual;
  e.diagnostics.fit_condition = e.fit.condition;
  e.diagnostics.quadrature_error = b.remainder_error;
  e.diagnostics.tail_error = b.tail_error;
  return e;
}

EtaValue relative_eta_invariant(const OperatorPair& pair, const EtaConfig& config) {
  return relative_eta_invariant(eigensolve(pair, false), pair.a0.manifold_dim, config);
}

double reduced_eta(const EtaValue& e) {
  return 0.5 * (e.finite_part + e.kernel_dim_a1 - e.kernel_dim_a0);
}

Complex relative_zeta_function(const PairSpectra& pair, Complex s, int n, const EtaConfig& config) {
  const ExponentialSum h = heat_terms(pair);
  const AsymptoticFit fit = fit_short_time(h, ExpansionKind::heat, n, config.fit);
  // 1/Γ(s/2) cancels the pole at 0 and leaves a_n.
  if (s == Complex(0.0)) return fit.coeffs[n];
  check_poles(fit, s, config.pole_distance);
  const Bracket b = mellin_bracket(h, fit, s, config, false);
  return special::rgamma(0.5 * s) * (b.fit_part + b.remainder + b.tail);
}

ZetaValue relative_zeta_invariant(const PairSpectra& pair, int n, const EtaConfig& config) {
  ZetaValue z;
  z.kernel_dim_a0 = kernel_dim(pair.a0);
  z.kernel_dim_a1 = kernel_dim(pair.a1);
  z.fit = fit_short_time(heat_terms(pair), ExpansionKind::heat, n, config.fit);
  z.value = z.fit.coeffs[n];
  return z;
}

ZetaValue relative_zeta_invariant(const OperatorPair& pair, const EtaConfig& config) {
  return relative_zeta_invariant(eigensolve(pair, false), pair.a0.manifold_dim, config);
}

double additivity_check(const DiracOperator& a0, const DiracOperator& a1, const DiracOperator& a2,
                        std::span<const Complex> s_samples, const EtaConfig& config) {
  const Spectrum s0 = eigensolve(a0, false);
  const Spectrum s1 = eigensolve(a1, false);
  const Spectrum s2 = eigensolve(a2, false);
  const int n = a0.manifold_dim;
  const PairSpectra p10{s0, s1};
  const PairSpectra p21{s1, s2};
  const PairSpectra p20{s0, s2};
  double worst = std::abs(relative_eta_invariant(p21, n, config).finite_part +
                          relative_eta_invariant(p10, n, config).finite_part -
                          relative_eta_invariant(p20, n, config).finite_part);
  for (Complex s : s_samples) {
    if (s == Complex(0.0)) continue;
    worst = std::max(worst, std::abs(relative_eta_function(p21, s, n, config) +
                                     relative_eta_function(p10, s, n, config) -
                                     relative_eta_function(p20, s, n, config)));
  }
  return worst;
}

}  // namespace spectral_eta
