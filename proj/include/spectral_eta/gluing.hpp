#pragma once

#include <vector>

#include "spectral_eta/eta_zeta.hpp"
#include "spectral_eta/flow_shift.hpp"
#include "spectral_eta/lattice.hpp"

namespace spectral_eta {

/// The operator cut at one node and closed by the θ-interpolated condition
/// cosθ Π₊(ℬ̃) s = sinθ τ Π₋(ℬ̃) s on the doubled boundary data s = (s_R, s_L).
/// Both halves keep the cut node with half-cell weighting; the doubled
/// operator is blockdiag(left half, right half).
struct ThetaBVP {
  double theta = 0.0;
  DiracOperator op;  // compressed onto ker Π̃(θ); constraint_subspace is in the doubled space
  BoundaryOperator boundary;
  Matrix boundary_doubled;  // ℬ̃ = diag(ℬ, −ℬ)
  Matrix tau;               // swap s_R ↔ s_L
  Matrix pi_plus;
  Matrix pi_minus;
  Matrix pi_theta;  // cos²θ Π₊ + sin²θ Π₋ − ½ sin2θ τ(Π₊ + Π₋)

  /// U(θ) = cosθ(Π₊ + Π₋) + sinθ(Π₊ − Π₋)τ.
  Matrix unitary() const;
  double unitarity_defect() const;
};

ThetaBVP build_theta_bvp(const DiracOperator& a, int cut, double theta, const CutOptions& options = {});

/// Spectrum of the θ = 0 endpoint computed independently: APS on the right
/// half together with dual APS on the left half.
Eigen::VectorXd aps_dual_union_spectrum(const DiracOperator& a, int cut, const CutOptions& options = {});

/// Largest gap between two sorted multisets of equal size (∞ if sizes differ).
double multiset_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct ThetaScanPoint {
  double theta = 0.0;
  double xi = 0.0;
  double xi_bar = 0.0;  // ξ mod 1, lifted continuously along the grid
  EtaValue eta;
};

struct ThetaScan {
  std::vector<ThetaScanPoint> points;
  /// max |ξ̄(θ) − ξ̄(π/4)| over the grid (the π/4 point must be present).
  double sup_variation = 0.0;
};

/// ξ(0; 𝒜₁(θ), 𝒜₀) with 𝒜₁ cut and 𝒜₀ left whole.
ThetaScan theta_xi_scan(const OperatorPair& pair, int cut, const std::vector<double>& thetas,
                        const EtaConfig& config, const CutOptions& options = {});

struct GluingResult {
  EtaValue eta;
  double xi_pair = 0.0;
  double xi_piece_1 = 0.0;  // ½(η + dim ker) of the APS piece of 𝒜₁
  double xi_piece_0 = 0.0;
  Side side = Side::left;
  double residual = 0.0;  // distance of ξ − ξ′₁ + ξ′₀ to ℤ
};

/// Compares ξ(0;𝒜₁,𝒜₀) with the compact APS pieces on the side of the cut
/// that holds the difference support.
GluingResult gluing_check(const OperatorPair& pair, int cut, const EtaConfig& config = {},
                          const CutOptions& options = {});

/// ½(signature + dim ker) of a finite Hermitian matrix.
double compact_xi(const Spectrum& s);

struct Mod2Result {
  EtaValue eta;
  FlowResult flow;
  double predicted = 0.0;     // 2sf − dim ker 𝒜₁ + dim ker 𝒜₀
  double residual_mod2 = 0.0;  // distance of η₀ − predicted to 2ℤ
  double residual = 0.0;       // |η₀ − predicted|
};

Mod2Result mod2z_check(const OperatorPair& pair, const EtaConfig& config = {}, const FlowOptions& flow = {});

/// Distance of x to the nearest multiple of `period`.
double distance_to_lattice(double x, double period);

}  // namespace spectral_eta
