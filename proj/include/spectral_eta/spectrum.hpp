#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "spectral_eta/lattice.hpp"

namespace spectral_eta {

inline constexpr double kDefaultKernelTol = 1e-8;

/// Sorted real spectrum of a finite Hermitian matrix.
struct Spectrum {
  Eigen::VectorXd eigenvalues;
  std::optional<Matrix> eigenvectors;  // columns, same order as eigenvalues
  double kernel_tol = kDefaultKernelTol;
  Eigen::Index source_dim = 0;

  static Spectrum from_values(std::vector<double> values, double kernel_tol = kDefaultKernelTol);

  double spectral_radius() const;
  /// |λ| below this counts as kernel: kernel_tol·(1 + spectral radius).
  double kernel_threshold() const;
  bool is_kernel(double lambda) const { return std::abs(lambda) < kernel_threshold(); }
  int negative_count() const;
  int positive_count() const;
};

/// The pair (𝒜₀, 𝒜₁) through its spectra.
struct PairSpectra {
  Spectrum a0;
  Spectrum a1;
};

Spectrum eigensolve(const Matrix& m, bool want_vectors, double kernel_tol = kDefaultKernelTol);
Spectrum eigensolve(const DiracOperator& a, bool want_vectors, double kernel_tol = kDefaultKernelTol);
PairSpectra eigensolve(const OperatorPair& pair, bool want_vectors, double kernel_tol = kDefaultKernelTol);

int kernel_dim(const Spectrum& s);

/// Tr e^{−tA²}.
double heat_trace(const Spectrum& s, double t);
/// Tr A e^{−tA²}.
double eta_trace(const Spectrum& s, double t);
/// Tr(𝒜₁e^{−t𝒜₁²} − 𝒜₀e^{−t𝒜₀²}) when weighted, the heat-trace difference otherwise.
double relative_trace(const PairSpectra& pair, double t, bool weighted);

/// Smallest non-kernel |λ| over both spectra.
double spectral_gap(const PairSpectra& pair);

enum class TraceKind {
  plain,
  eta_weighted,
  relative,
  relative_eta_weighted,
  derivative_weighted,
};

struct HeatTraceSamples {
  std::vector<double> t_grid;
  std::vector<double> values;
  TraceKind kind = TraceKind::plain;
};

/// `count` log-spaced points on [t_lo, t_hi].
std::vector<double> log_spaced(double t_lo, double t_hi, int count);

}  // namespace spectral_eta
