#pragma once

#include <complex>
#include <span>
#include <vector>

#include "spectral_eta/lattice.hpp"
#include "spectral_eta/spectrum.hpp"

namespace spectral_eta {

// exact_taylor reads the expansion off the odd/even power traces, which is
// exact for finite matrices. least_squares fits sampled traces on a window
// and continues the fitted expansion below it.
enum class FitMode { exact_taylor, least_squares };
enum class TailMode { closed_form, quadrature };
// spectral: the window is measured in units of 1/ρ², ρ the spectral radius.
enum class WindowUnits { absolute, spectral };

/// Which short-time expansion a fit represents:
///   eta       Tr(𝒜₁e^{−t𝒜₁²} − 𝒜₀e^{−t𝒜₀²}) ~ Σ b_k t^{(k−n−1)/2}
///   heat      Tr(e^{−t𝒜₁²} − e^{−t𝒜₀²}) − kernel ~ Σ a_k t^{(k−n)/2}
///   variation Tr(Ȧ e^{−t𝒜²})                 ~ Σ c_k t^{(k−n−1)/2}
enum class ExpansionKind { eta, heat, variation };

struct FitConfig {
  FitMode mode = FitMode::exact_taylor;
  double t_lo = 1e-4;
  double t_cut = 1.0;
  int samples = 60;
  int K = -1;  // n + 7 when negative
  WindowUnits units = WindowUnits::absolute;
  double max_condition = 1e12;
};

struct AsymptoticFit {
  int n = 1;
  int K = 0;
  ExpansionKind kind = ExpansionKind::eta;
  FitMode mode = FitMode::exact_taylor;
  std::vector<double> coeffs;  // k = 0..K
  double t_lo = 0.0;
  double t_cut = 1.0;
  double residual = 0.0;   // sup |samples − fit| on the window
  double condition = 1.0;  // of the column-scaled design (1 for exact_taylor)

  double exponent(int k) const;
  double evaluate(double t) const;
  /// Locations s = n − k of the poles induced by non-negligible coefficients.
  std::vector<double> poles(double rel_threshold = 1e-10) const;
};

/// h(t) = Σ_i coeff_i e^{−tλ_i²}. All three expansions reduce to this form
/// once a pair (or a path point) has been diagonalized.
struct ExponentialSum {
  std::vector<double> lambda;
  std::vector<double> coeff;

  double operator()(double t) const;
  /// Σ_i coeff_i λ_i^{2m}
  double moment(int m) const;
  double radius() const;
};

/// ±λ over the non-kernel eigenvalues of 𝒜₁ (+) and 𝒜₀ (−).
ExponentialSum eta_terms(const PairSpectra& pair);
/// ±1 over the non-kernel eigenvalues, i.e. the heat difference with the
/// kernel dimensions already removed.
ExponentialSum heat_terms(const PairSpectra& pair);
/// ⟨v_i, Ȧ v_i⟩ over all eigenpairs of 𝒜 (eigenvectors required).
ExponentialSum variation_terms(const Spectrum& s, const Matrix& derivative);

/// Least-squares fit of Σ_{k≤K} coeff_k t^{exponent(k)} to the samples.
AsymptoticFit fit_short_time(const HeatTraceSamples& samples, ExpansionKind kind, int n, int K);
/// Fit through either mode; the window follows `config.units`.
AsymptoticFit fit_short_time(const ExponentialSum& h, ExpansionKind kind, int n, const FitConfig& config);
/// Exact expansion from power-trace moments μ_m (coefficient of t^m is (−1)^m μ_m / m!).
AsymptoticFit fit_exact_taylor(std::span<const double> moments, ExpansionKind kind, int n, int K, double t_cut);

struct EtaConfig {
  FitConfig fit;
  TailMode tail = TailMode::closed_form;
  double residue_tol = 1e-6;
  double quad_tol = 1e-13;
  double pole_distance = 1e-6;
};

struct EtaDiagnostics {
  double fit_residual = 0.0;
  double fit_condition = 1.0;
  double quadrature_error = 0.0;
  double tail_error = 0.0;
};

/// Laurent data of η(s; 𝒜₁, 𝒜₀) at s = 0.
struct EtaValue {
  double finite_part = 0.0;
  double residue = 0.0;
  int kernel_dim_a0 = 0;
  int kernel_dim_a1 = 0;
  bool irregular_at_zero = false;
  AsymptoticFit fit;
  EtaDiagnostics diagnostics;
};

struct ZetaValue {
  double value = 0.0;
  int kernel_dim_a0 = 0;
  int kernel_dim_a1 = 0;
  AsymptoticFit fit;
};

/// Σ sign(λ)|λ|^{−s} over the non-kernel spectrum.
Complex eta_direct(const Spectrum& s, Complex z);

/// ∫_{t_cut}^∞ t^{−1/2} Σ λe^{−tλ²} dt = Σ sign(λ)√π erfc(|λ|√t_cut) when weighted;
/// ∫_{t_cut}^∞ t^{−1} Σ e^{−tλ²} dt = Σ Γ(0, t_cut λ²) otherwise. Kernel excluded.
double closed_form_tail(const Spectrum& s, double t_cut, bool weighted);

Complex relative_eta_function(const PairSpectra& pair, Complex s, int n, const EtaConfig& config = {});
Complex relative_eta_function(const OperatorPair& pair, Complex s, const EtaConfig& config = {});

EtaValue relative_eta_invariant(const PairSpectra& pair, int n, const EtaConfig& config = {});
EtaValue relative_eta_invariant(const OperatorPair& pair, const EtaConfig& config = {});

/// ξ = ½(η₀ + dim ker 𝒜₁ − dim ker 𝒜₀).
double reduced_eta(const EtaValue& e);

Complex relative_zeta_function(const PairSpectra& pair, Complex s, int n, const EtaConfig& config = {});
ZetaValue relative_zeta_invariant(const PairSpectra& pair, int n, const EtaConfig& config = {});
ZetaValue relative_zeta_invariant(const OperatorPair& pair, const EtaConfig& config = {});

/// max over s ∈ samples ∪ {0} of |η(s;a2,a1) + η(s;a1,a0) − η(s;a2,a0)|, the
/// s = 0 entry using finite parts.
double additivity_check(const DiracOperator& a0, const DiracOperator& a1, const DiracOperator& a2,
                        std::span<const Complex> s_samples, const EtaConfig& config = {});

}  // namespace spectral_eta
