#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "spectral_eta/lattice.hpp"

namespace spectral_eta {

using Rng = std::mt19937_64;

/// GUE-type matrix scaled so the spectrum fills roughly [−2, 2].
Matrix random_hermitian(int n, Rng& rng);

/// U diag(eigenvalues) U* with U Haar-distributed.
Matrix hermitian_with_spectrum(const std::vector<double>& eigenvalues, Rng& rng);

/// n values with |λ| uniform in [gap, radius] and random signs, plus
/// `kernel` exact zeros.
std::vector<double> random_gapped_spectrum(int n, double gap, double radius, Rng& rng, int kernel = 0);

/// Hermitian matrix supported on the leading block × block corner.
Matrix random_block(int n, int block, double scale, Rng& rng);

/// Smallest |λ| of a Hermitian matrix.
double min_abs_eigenvalue(const Matrix& m);

/// a1 = a0 + a random leading block. Draws are repeated until both operators
/// have min |λ| ≥ min_gap (0 accepts the first draw).
OperatorPair random_block_pair(int n, int block, Rng& rng, double min_gap = 0.0);

/// Three operators differing pairwise on the leading block, all with min |λ| ≥ min_gap.
/// The common part has a spectral gap of 2·min_gap.
std::vector<DiracOperator> random_block_triple(int n, int block, Rng& rng, double min_gap);

/// Linear path a0 → a0 + P with P a random leading block; endpoints have
/// min |λ| ≥ min_gap.
OperatorPath random_block_path(int n, int block, Rng& rng, double min_gap);

/// Independent operators with exactly k0, k1 zero eigenvalues.
OperatorPair random_kernel_pair(int n, int k0, int k1, Rng& rng);

/// Named analytic profiles for potentials; see the README for parameters.
struct Profile {
  enum class Form { zero, constant, abs, confining, bump, gaussian, samples } form = Form::zero;
  double amplitude = 0.0;
  std::vector<double> center;  // per axis
  double width = 1.0;          // bump radius, gaussian width or confining plateau
  double growth = 1.0;         // confining: slope of the quadratic growth
  double cutoff = 0.0;         // gaussian: zero beyond this radius (0 keeps it global)
  std::vector<double> values;  // samples

  double operator()(const std::vector<double>& x) const;
  std::vector<double> sample(const Grid& grid) const;
};

/// The planar example: A = −iσ₁∂₁ − iσ₂∂₂ + diag(f₀ + ρ(r) f, −f₀ − ρ(r) f).
struct ExampleR2 {
  Grid grid;
  DerivativeScheme scheme = DerivativeScheme::spectral;
  Profile f0;
  Profile patch;

  static ExampleR2 standard(int points = 32, double length = 8.0);
  DiracOperator base() const;
  OperatorPath path() const;
  OperatorPair pair() const;
};

/// A 1D confining pair for cut experiments: vσ₃ with v constant on a plateau
/// around the cut and growing outside; 𝒜₁ adds a compact bump with a scalar
/// part away from the cut.
struct CutModel {
  Grid grid;
  int cut = 0;
  double mass = 1.0;
  double plateau = 2.0;
  Profile patch_sigma3;
  Profile patch_scalar;

  static CutModel standard(int points, double length = 16.0);
  OperatorPair pair() const;
};

}  // namespace spectral_eta
