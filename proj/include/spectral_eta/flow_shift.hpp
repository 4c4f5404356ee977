#pragma once

#include <functional>
#include <vector>

#include "spectral_eta/eta_zeta.hpp"
#include "spectral_eta/lattice.hpp"
#include "spectral_eta/spectrum.hpp"

namespace spectral_eta {

struct Crossing {
  double r = 0.0;
  int direction = 0;  // +1 negative → nonnegative, −1 the reverse
};

struct FlowOptions {
  int initial_steps = 32;
  int refine_factor = 2;
  long max_steps = 1'000'000;
  double kernel_tol = kDefaultKernelTol;
  // Keep the sorted spectra at accepted r values (flow plots).
  bool record = false;
};

struct FlowResult {
  int sf = 0;
  std::vector<Crossing> crossings;
  long steps_used = 0;
  double min_matching_gap = 0.0;
  int n_minus_start = 0;
  int n_minus_end = 0;
  std::vector<double> r_samples;
  std::vector<Eigen::VectorXd> spectra;
};

/// Net zero-crossings along the path, kernel counted as nonnegative, so that
/// sf = n₋(start) − n₋(end).
FlowResult spectral_flow(const OperatorPath& path, const FlowOptions& options = {});

enum class ShiftNormalization {
  counting,     // N₀ − N₁, zero outside the hull of both spectra
  gap_anchored  // shifted to vanish on (−δ, 0)
};

/// σ(λ) on the open intervals between breakpoints. values[j] holds on
/// (breakpoints[j−1], breakpoints[j]); values.front() and values.back() cover
/// the two unbounded intervals.
struct SpectralShift {
  std::vector<double> breakpoints;
  std::vector<int> values;
  double delta = 0.0;
  ShiftNormalization normalization = ShiftNormalization::counting;

  int value_at(double lambda) const;
  /// The value on (0, δ).
  int near_zero_value() const;
};

SpectralShift spectral_shift(const PairSpectra& pair,
                             ShiftNormalization normalization = ShiftNormalization::counting);

/// A smooth test function supported in [lo, hi].
struct TestFunction {
  std::function<double(double)> phi;
  std::function<double(double)> dphi;
  double lo = 0.0;
  double hi = 0.0;

  /// exp(−1/(1 − x²)) in x = (λ − center)/radius.
  static TestFunction bump(double center, double radius);
  /// (1 − x²)^p, C^{p−1} at the edges.
  static TestFunction polynomial_bump(double center, double radius, int p);
  /// sin(ωλ) times a bump.
  static TestFunction modulated_bump(double center, double radius, double omega);
};

struct KreinResult {
  double trace_difference = 0.0;  // Σφ(λ₁) − Σφ(λ₀)
  double shift_integral = 0.0;    // ∫φ′σ
  double residual = 0.0;
};

KreinResult krein_check(const PairSpectra& pair, const TestFunction& phi);

struct DecayResult {
  double rate = 0.0;
  double intercept = 0.0;
  double delta = 0.0;
  double half_gap_bound = 0.0;  // δ²/2
  double matrix_rate = 0.0;  // δ²
  std::vector<double> t;
  std::vector<double> log_abs_trace;
};

/// Slope of log|Tr(𝒜₁e^{−t𝒜₁²} − 𝒜₀e^{−t𝒜₀²})| on [t_lo, t_hi]; the default
/// range is [2/δ², 20/δ²].
DecayResult decay_check(const PairSpectra& pair, double t_lo = 0.0, double t_hi = 0.0, int samples = 40);

/// c_k(r) of Tr(Ȧ_r e^{−t𝒜_r²}).
AsymptoticFit variation_coefficient(const OperatorPath& path, double r, const FitConfig& config, int n);

struct VariationPoint {
  double r = 0.0;
  double eta_derivative = 0.0;  // centred difference of η₀(𝒜_r, 𝒜₀)
  double c_n = 0.0;
  double stencil = 0.0;
  double residual = 0.0;  // |dη̄/dr + (2/√π)c_n|
  AsymptoticFit fit;
};

struct VariationResult {
  std::vector<VariationPoint> points;
  double max_residual = 0.0;
};

/// The variation formula on `r_grid`. Stencils that straddle a zero crossing
/// are shrunk; StencilStraddlesCrossing if that fails.
VariationResult variation_check(const OperatorPath& path, const std::vector<double>& r_grid,
                                const EtaConfig& config, double stencil = 1e-3);

/// `count` Chebyshev–Lobatto points on [0, 1].
std::vector<double> chebyshev_grid(int count);

struct SfIdentityReport {
  EtaValue eta;
  double xi = 0.0;
  FlowResult flow;
  double variation_integral = 0.0;  // ½∫ dη̄/dr dr = −(1/√π)∫c_n dr
  double residual = 0.0;            // |ξ − variation_integral − sf|
  double eta_identity_residual = 0.0;  // |η₀ − (2sf − k₁ + k₀)|
  std::vector<VariationPoint> variation;
};

struct SfIdentityOptions {
  EtaConfig eta;
  FlowOptions flow;
  // Fit used for c_n(r); empty grid skips the variation term.
  FitConfig variation_fit;
  std::vector<double> r_grid = chebyshev_grid(17);
};

SfIdentityReport sf_eta_identity(const OperatorPath& path, const SfIdentityOptions& options = {});

}  // namespace spectral_eta
