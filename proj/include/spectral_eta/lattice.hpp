#pragma once

#include <array>
#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace spectral_eta {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

enum class Topology { periodic, truncated_line, half_line };

// Central differences exhibit fermion doubling; use the spectral scheme
// whenever continuum short-time coefficients are being fitted.
enum class DerivativeScheme { central_difference, spectral };

/// Uniform tensor grid in one or two dimensions. Nodes are numbered with
/// the x index running fastest.
struct Grid {
  int dim = 1;
  int points_per_axis = 0;
  double spacing = 1.0;
  Topology topology = Topology::periodic;
  std::vector<double> origin_offset;  // physical coordinate of node 0, per axis

  /// Grid symmetric about the origin.
  static Grid centered(int dim, int points_per_axis, double spacing, Topology topology);

  void validate() const;
  int node_count() const;
  std::array<int, 2> axis_indices(int node) const;
  double coordinate(int node, int axis) const;
  bool on_boundary(int node) const;
};

enum class PotentialKind { diagonal_sigma3, diagonal_general, matrix_valued };

/// Per-node Hermitian blocks of the zeroth-order part of an operator.
class Potential {
 public:
  Potential(PotentialKind kind, std::vector<Matrix> blocks);

  /// v(x) σ₃ on a rank-2 bundle.
  static Potential sigma3(std::span<const double> v);
  /// w(x)·1 + v(x) σ₃, a diagonal potential with a scalar part.
  static Potential diagonal(std::span<const double> scalar, std::span<const double> v);
  static Potential zero(int nodes, int rank);

  PotentialKind kind() const { return kind_; }
  int rank() const { return rank_; }
  int nodes() const { return static_cast<int>(blocks_.size()); }
  const Matrix& block(int node) const { return blocks_.at(node); }
  const std::vector<int>& support() const { return support_; }

  /// Block-diagonal matrix of size nodes·rank.
  Matrix as_matrix() const;

 private:
  PotentialKind kind_;
  int rank_ = 0;
  std::vector<Matrix> blocks_;
  std::vector<int> support_;
};

/// A finite Hermitian matrix together with the lattice it discretizes.
/// Raw matrices carry no grid; lattice models also keep the potential they
/// were built from so that cut constructions can inspect it.
struct DiracOperator {
  Matrix matrix;
  int bundle_rank = 2;
  int manifold_dim = 1;
  std::optional<Grid> grid;
  DerivativeScheme scheme = DerivativeScheme::central_difference;
  std::optional<Potential> potential;
  std::optional<Matrix> constraint_subspace;

  static DiracOperator raw(Matrix m, int bundle_rank = 1, int manifold_dim = 1);

  Eigen::Index dimension() const { return matrix.rows(); }
  int nodes() const { return static_cast<int>(matrix.rows() / bundle_rank); }
};

/// ‖M − Mᴴ‖_max / ‖M‖_max (0 for the zero matrix).
double hermiticity_defect(const Matrix& m);

/// Hermitian discretization of −i d/dx along one axis of `grid`.
Matrix momentum_1d(const Grid& grid, DerivativeScheme scheme);

/// A = −iσ₁ d/dx + V(x), with V given blockwise (V = v σ₃ for the Callias model).
DiracOperator build_dirac_1d(const Grid& grid, const Potential& v, DerivativeScheme scheme);

/// A = −iσ₁∂₁ − iσ₂∂₂ + diag(f, −f).
DiracOperator build_dirac_2d(const Grid& grid, std::span<const Complex> f, DerivativeScheme scheme);
DiracOperator build_dirac_2d(const Grid& grid, std::span<const double> f, DerivativeScheme scheme);

/// Two operators on the same lattice that agree outside `diff_support`
/// (node indices).
struct OperatorPair {
  DiracOperator a0;
  DiracOperator a1;
  std::vector<int> diff_support;
};

OperatorPair make_pair(const DiracOperator& a0, const Potential& patch);
/// Pairs two existing operators, recording the nodes whose rows differ.
OperatorPair make_pair(const DiracOperator& a0, const DiracOperator& a1);

/// Largest entry of (a1 − a0) outside the recorded support rows/columns.
double locality_defect(const OperatorPair& pair);

/// ρ(r) with its derivative.
struct Schedule {
  std::function<double(double)> rho;
  std::function<double(double)> rho_prime;

  static Schedule linear();
};

/// r ↦ base + ρ(r)·perturbation on r ∈ [0, 1].
class OperatorPath {
 public:
  OperatorPath(DiracOperator base, Matrix perturbation, Schedule schedule = Schedule::linear());
  OperatorPath(DiracOperator base, const Potential& patch, Schedule schedule = Schedule::linear());

  Matrix at(double r) const;
  DiracOperator operator_at(double r) const;
  /// dA/dr = ρ'(r)·perturbation.
  Matrix derivative(double r) const;

  const DiracOperator& base() const { return base_; }
  const Matrix& perturbation() const { return perturbation_; }
  const Schedule& schedule() const { return schedule_; }
  const Matrix& start() const { return start_; }
  const Matrix& end() const { return end_; }

  /// Same endpoints' generator restricted to [r0, r1], reparametrized to [0, 1].
  OperatorPath subpath(double r0, double r1) const;

 private:
  DiracOperator base_;
  Matrix perturbation_;
  Schedule schedule_;
  Matrix start_;
  Matrix end_;
};

/// The boundary operator ℬ of A = c(ν)(∂_u + ℬ) at a lattice cut, where u
/// increases to the right.
struct BoundaryOperator {
  Matrix matrix;
  int cut = 0;
  double coordinate = 0.0;
  Eigen::VectorXd eigenvalues;

  double min_abs_eigenvalue() const;
};

struct CutOptions {
  int collar = 3;
  double kernel_tol = 1e-8;
};

enum class Side { left, right };

BoundaryOperator restrict_to_boundary(const DiracOperator& a, int cut, const CutOptions& options = {});

/// Rows/columns of `a` on one side of the cut, cut node included. The cut
/// node carries half a cell on each side, so its links to the interior are
/// scaled by √2 in the orthonormal nodal basis.
Matrix half_grid_restriction(const DiracOperator& a, int cut, Side side);

/// Node indices (in `a`) of the half grid, in local order.
std::vector<int> half_grid_nodes(const DiracOperator& a, int cut, Side side);

/// The half-line operator compressed onto {u : Π(ℬ_side) u(cut) = 0} with
/// Π = Π_{≥0} (APS) or Π_{>0} (dual APS). ℬ_side is ℬ on the right and −ℬ on
/// the left, the boundary operator seen from inside each half.
DiracOperator build_aps_halfline(const DiracOperator& a, int cut, Side side, bool dual,
                                 const CutOptions& options = {});

/// Pauli matrices.
Matrix sigma(int which);

}  // namespace spectral_eta
