#include "spectral_eta/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "spectral_eta/error.hpp"

namespace spectral_eta {

namespace {

constexpr double kHermitianTol = 1e-12;
constexpr double kRowAgreementTol = 1e-14;

bool is_zero_block(const Matrix& b) { return b.cwiseAbs().maxCoeff() == 0.0; }

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

void check_same_layout(const DiracOperator& a, const Potential& p) {
  if (p.rank() != a.bundle_rank || p.nodes() != a.nodes())
    throw Error(Errc::invalid_potential, "potential layout does not match the operator");
}

}  // namespace

// ---------------------------------------------------------------- Grid

Grid Grid::centered(int dim, int points_per_axis, double spacing, Topology topology) {
  Grid g;
  g.dim = dim;
  g.points_per_axis = points_per_axis;
  g.spacing = spacing;
  g.topology = topology;
  g.origin_offset.assign(dim, -0.5 * (points_per_axis - 1) * spacing);
  g.validate();
  return g;
}

void Grid::validate() const {
  if (dim != 1 && dim != 2) throw Error(Errc::invalid_grid, "dim must be 1 or 2");
  if (points_per_axis < 4) throw Error(Errc::invalid_grid, "need at least 4 points per axis");
  if (!(spacing > 0.0)) throw Error(Errc::invalid_grid, "spacing must be positive");
  if (topology == Topology::half_line && dim != 1)
    throw Error(Errc::invalid_grid, "half-line topology is one-dimensional");
  if (!origin_offset.empty() && static_cast<int>(origin_offset.size()) != dim)
    throw Error(Errc::invalid_grid, "origin offset must have one entry per axis");
}

int Grid::node_count() const { return dim == 1 ? points_per_axis : points_per_axis * points_per_axis; }

std::array<int, 2> Grid::axis_indices(int node) const {
  return {node % points_per_axis, dim == 2 ? node / points_per_axis : 0};
}

double Grid::coordinate(int node, int axis) const {
  const double origin = origin_offset.empty() ? 0.0 : origin_offset[axis];
  return origin + spacing * axis_indices(node)[axis];
}

bool Grid::on_boundary(int node) const {
  if (topology == Topology::periodic) return false;
  const auto idx = axis_indices(node);
  for (int axis = 0; axis < dim; ++axis)
    if (idx[axis] == 0 || idx[axis] == points_per_axis - 1) return true;
  return false;
}

// ---------------------------------------------------------------- Potential

Potential::Potential(PotentialKind kind, std::vector<Matrix> blocks)
    : kind_(kind), blocks_(std::move(blocks)) {
  if (blocks_.empty()) throw Error(Errc::invalid_potential, "empty potential");
  rank_ = static_cast<int>(blocks_.front().rows());
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const Matrix& b = blocks_[i];
    if (b.rows() != rank_ || b.cols() != rank_)
      throw Error(Errc::invalid_potential, "block " + std::to_string(i) + " has the wrong shape");
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    if ((b - b.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol * scale)
      throw Error(Errc::invalid_potential, "block " + std::to_string(i) + " is not Hermitian");
    if (!is_zero_block(b)) support_.push_back(static_cast<int>(i));
  }
}

Potential Potential::sigma3(std::span<const double> v) {
  std::vector<Matrix> blocks;
  blocks.reserve(v.size());
  for (double x : v) blocks.push_back(x * spectral_eta::sigma(3));
  return Potential(PotentialKind::diagonal_sigma3, std::move(blocks));
}

Potential Potential::diagonal(std::span<const double> scalar, std::span<const double> v) {
  if (scalar.size() != v.size()) throw Error(Errc::invalid_potential, "profile lengths differ");
  std::vector<Matrix> blocks;
  blocks.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    Matrix b = Matrix::Zero(2, 2);
    b(0, 0) = scalar[i] + v[i];
    b(1, 1) = scalar[i] - v[i];
    blocks.push_back(std::move(b));
  }
  return Potential(PotentialKind::diagonal_general, std::move(blocks));
}

Potential Potential::zero(int nodes, int rank) {
  return Potential(PotentialKind::diagonal_general,
                   std::vector<Matrix>(static_cast<std::size_t>(nodes), Matrix::Zero(rank, rank)));
}

Matrix Potential::as_matrix() const {
  const Eigen::Index n = static_cast<Eigen::Index>(blocks_.size()) * rank_;
  Matrix m = Matrix::Zero(n, n);
  for (int i = 0; i < nodes(); ++i) m.block(i * rank_, i * rank_, rank_, rank_) = blocks_[i];
  return m;
}

// ---------------------------------------------------------------- operators

Matrix sigma(int which) {
  Matrix s = Matrix::Zero(2, 2);
  const Complex i(0.0, 1.0);
  switch (which) {
    case 0: s(0, 0) = s(1, 1) = 1.0; break;
    case 1: s(0, 1) = s(1, 0) = 1.0; break;
    case 2: s(0, 1) = -i; s(1, 0) = i; break;
    case 3: s(0, 0) = 1.0; s(1, 1) = -1.0; break;
    default: throw std::invalid_argument("Pauli index must be 0..3");
  }
  return s;
}

DiracOperator DiracOperator::raw(Matrix m, int bundle_rank, int manifold_dim) {
  if (m.rows() != m.cols() || m.rows() % bundle_rank != 0)
    throw Error(Errc::invalid_potential, "raw operator must be square with whole nodes");
  DiracOperator a;
  a.matrix = std::move(m);
  a.bundle_rank = bundle_rank;
  a.manifold_dim = manifold_dim;
  return a;
}

double hermiticity_defect(const Matrix& m) {
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() / scale;
}

Matrix momentum_1d(const Grid& grid, DerivativeScheme scheme) {
  const int n = grid.points_per_axis;
  const double h = grid.spacing;
  const Complex i(0.0, 1.0);
  Matrix p = Matrix::Zero(n, n);

  if (scheme == DerivativeScheme::central_difference) {
    for (int j = 0; j + 1 < n; ++j) {
      p(j, j + 1) = -i / (2.0 * h);
      p(j + 1, j) = i / (2.0 * h);
    }
    if (grid.topology == Topology::periodic) {
      p(n - 1, 0) = -i / (2.0 * h);
      p(0, n - 1) = i / (2.0 * h);
    }
    return p;
  }

  if (grid.topology != Topology::periodic)
    throw Error(Errc::scheme_mismatch, "spectral differentiation needs a periodic grid");

  // Circulant symbol multiplier: ξ_k = 2πk/(Nh) for k ≤ N/2, k − N above.
  // The Nyquist mode keeps +π/h so that only the constant mode is annihilated.
  std::vector<Complex> column(n, 0.0);
  for (int d = 0; d < n; ++d) {
    Complex acc = 0.0;
    for (int k = 0; k < n; ++k) {
      const int kk = (2 * k <= n) ? k : k - n;
      const double xi = 2.0 * std::numbers::pi * kk / (n * h);
      acc += xi * std::polar(1.0, 2.0 * std::numbers::pi * k * d / n);
    }
    column[d] = acc / static_cast<double>(n);
  }
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l) p(j, l) = column[((j - l) % n + n) % n];
  return p;
}

DiracOperator build_dirac_1d(const Grid& grid, const Potential& v, DerivativeScheme scheme) {
  grid.validate();
  if (grid.dim != 1) throw Error(Errc::invalid_grid, "build_dirac_1d needs a 1D grid");
  if (v.rank() != 2 || v.nodes() != grid.node_count())
    throw Error(Errc::invalid_potential, "potential must have one 2x2 block per node");

  DiracOperator a;
  a.matrix = kron(momentum_1d(grid, scheme), sigma(1)) + v.as_matrix();
  a.bundle_rank = 2;
  a.manifold_dim = 1;
  a.grid = grid;
  a.scheme = scheme;
  a.potential = v;
  return a;
}

DiracOperator build_dirac_2d(const Grid& grid, std::span<const Complex> f, DerivativeScheme scheme) {
  std::vector<double> real(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (f[k].imag() != 0.0) throw Error(Errc::invalid_potential, "f must be real-valued");
    real[k] = f[k].real();
  }
  return build_dirac_2d(grid, std::span<const double>(real), scheme);
}

DiracOperator build_dirac_2d(const Grid& grid, std::span<const double> f, DerivativeScheme scheme) {
  grid.validate();
  if (grid.dim != 2) throw Error(Errc::invalid_grid, "build_dirac_2d needs a 2D grid");
  if (static_cast<int>(f.size()) != grid.node_count())
    throw Error(Errc::invalid_potential, "f must have one sample per node");

  const Matrix p = momentum_1d(grid, scheme);
  const Matrix id = Matrix::Identity(grid.points_per_axis, grid.points_per_axis);
  const Matrix px = kron(id, p);  // x runs fastest
  const Matrix py = kron(p, id);
  const Potential pot = Potential::sigma3(f);

  DiracOperator a;
  a.matrix = kron(px, sigma(1)) + kron(py, sigma(2)) + pot.as_matrix();
  a.bundle_rank = 2;
  a.manifold_dim = 2;
  a.grid = grid;
  a.scheme = scheme;
  a.potential = pot;
  return a;
}

// ---------------------------------------------------------------- pairs

OperatorPair make_pair(const DiracOperator& a0, const Potential& patch) {
  check_same_layout(a0, patch);
  if (a0.grid) {
    const Grid& g = *a0.grid;
    for (int node : patch.support())
      if (g.on_boundary(node))
        throw Error(Errc::not_compactly_supported,
                    "patch touches boundary node " + std::to_string(node));
    if (g.topology == Topology::periodic && static_cast<int>(patch.support().size()) == g.node_count())
      throw Error(Errc::not_compactly_supported, "patch covers the whole periodic grid");
  }

  OperatorPair pair{a0, a0, patch.support()};
  pair.a1.matrix += patch.as_matrix();
  if (a0.potential) {
    std::vector<Matrix> blocks;
    for (int i = 0; i < patch.nodes(); ++i) blocks.push_back(a0.potential->block(i) + patch.block(i));
    pair.a1.potential = Potential(PotentialKind::matrix_valued, std::move(blocks));
  }
  return pair;
}

OperatorPair make_pair(const DiracOperator& a0, const DiracOperator& a1) {
  if (a0.dimension() != a1.dimension() || a0.bundle_rank != a1.bundle_rank || a0.scheme != a1.scheme)
    throw Error(Errc::invalid_potential, "pair operators must share layout and scheme");
  const int r = a0.bundle_rank;
  const Matrix diff = a1.matrix - a0.matrix;
  const double scale = std::max(1.0, a0.matrix.cwiseAbs().maxCoeff());
  std::vector<int> support;
  for (int node = 0; node < a0.nodes(); ++node)
    if (diff.middleRows(node * r, r).cwiseAbs().maxCoeff() > kRowAgreementTol * scale)
      support.push_back(node);
  return OperatorPair{a0, a1, std::move(support)};
}

double locality_defect(const OperatorPair& pair) {
  const int r = pair.a0.bundle_rank;
  const Matrix diff = pair.a1.matrix - pair.a0.matrix;
  std::vector<bool> inside(pair.a0.nodes(), false);
  for (int node : pair.diff_support) inside[node] = true;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < diff.rows(); ++i)
    for (Eigen::Index j = 0; j < diff.cols(); ++j)
      if (!inside[i / r] && !inside[j / r]) worst = std::max(worst, std::abs(diff(i, j)));
  return worst;
}

// ---------------------------------------------------------------- paths

Schedule Schedule::linear() {
  return Schedule{[](double r) { return r; }, [](double) { return 1.0; }};
}

OperatorPath::OperatorPath(DiracOperator base, Matrix perturbation, Schedule schedule)
    : base_(std::move(base)), perturbation_(std::move(perturbation)), schedule_(std::move(schedule)) {
  if (perturbation_.rows() != base_.dimension() || perturbation_.cols() != base_.dimension())
    throw Error(Errc::invalid_potential, "perturbation size does not match the base operator");
  if (hermiticity_defect(perturbation_) > kHermitianTol)
    throw Error(Errc::invalid_potential, "perturbation is not Hermitian");
  start_ = at(0.0);
  end_ = at(1.0);
}

OperatorPath::OperatorPath(DiracOperator base, const Potential& patch, Schedule schedule)
    : OperatorPath(base, patch.as_matrix(), std::move(schedule)) {
  check_same_layout(base_, patch);
  if (base_.grid && static_cast<int>(patch.support().size()) >= base_.grid->node_count())
    throw Error(Errc::not_compactly_supported, "path must be constant outside a strict subset of nodes");
}

Matrix OperatorPath::at(double r) const { return base_.matrix + schedule_.rho(r) * perturbation_; }

DiracOperator OperatorPath::operator_at(double r) const {
  DiracOperator a = base_;
  a.matrix = at(r);
  a.potential.reset();
  return a;
}

Matrix OperatorPath::derivative(double r) const { return schedule_.rho_prime(r) * perturbation_; }

OperatorPath OperatorPath::subpath(double r0, double r1) const {
  const auto rho = schedule_.rho;
  const auto rho_prime = schedule_.rho_prime;
  const double len = r1 - r0;
  Schedule s{[=](double u) { return rho(r0 + u * len); },
             [=](double u) { return len * rho_prime(r0 + u * len); }};
  return OperatorPath(base_, perturbation_, std::move(s));
}

// ---------------------------------------------------------------- cuts

double BoundaryOperator::min_abs_eigenvalue() const { return eigenvalues.cwiseAbs().minCoeff(); }

BoundaryOperator restrict_to_boundary(const DiracOperator& a, int cut, const CutOptions& options) {
  if (!a.grid || a.grid->dim != 1 || a.bundle_rank != 2 || !a.potential)
    throw Error(Errc::not_product_near_cut, "cuts need a 1D lattice model with a recorded potential");
  if (a.scheme != DerivativeScheme::central_difference)
    throw Error(Errc::scheme_mismatch, "cuts need a local (central-difference) operator");
  const int n = a.grid->node_count();
  if (cut - options.collar < 0 || cut + options.collar >= n)
    throw Error(Errc::not_product_near_cut, "collar around the cut leaves the grid");

  // Product form: the zeroth-order term is the same v·σ₃ on the whole collar.
  const Matrix& ref = a.potential->block(cut);
  const double v = ref(0, 0).real();
  const Matrix expected = v * sigma(3);
  const double scale = std::max(1.0, std::abs(v));
  for (int node = cut - options.collar; node <= cut + options.collar; ++node)
    if ((a.potential->block(node) - expected).cwiseAbs().maxCoeff() > kHermitianTol * scale)
      throw Error(Errc::not_product_near_cut,
                  "potential is not a constant multiple of sigma3 at node " + std::to_string(node));

  // −iσ₁∂ + vσ₃ = (−iσ₁)(∂ + v σ₂), so ℬ = v σ₂ with eigenvalues ±|v|.
  BoundaryOperator b;
  b.matrix = v * sigma(2);
  b.cut = cut;
  b.coordinate = a.grid->coordinate(cut, 0);
  b.eigenvalues = Eigen::Vector2d(-std::abs(v), std::abs(v));
  if (b.min_abs_eigenvalue() <= options.kernel_tol)
    throw Error(Errc::singular_boundary_operator, "boundary operator has a kernel at the cut");
  return b;
}

std::vector<int> half_grid_nodes(const DiracOperator& a, int cut, Side side) {
  std::vector<int> nodes;
  if (side == Side::left)
    for (int node = 0; node <= cut; ++node) nodes.push_back(node);
  else
    for (int node = cut; node < a.nodes(); ++node) nodes.push_back(node);
  return nodes;
}

Matrix half_grid_restriction(const DiracOperator& a, int cut, Side side) {
  const int r = a.bundle_rank;
  const std::vector<int> nodes = half_grid_nodes(a, cut, side);
  const Eigen::Index m = static_cast<Eigen::Index>(nodes.size()) * r;
  Matrix h(m, m);
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (std::size_t j = 0; j < nodes.size(); ++j)
      h.block(i * r, j * r, r, r) = a.matrix.block(nodes[i] * r, nodes[j] * r, r, r);

  const Eigen::Index local_cut = (side == Side::left) ? m - r : 0;
  const double w = std::sqrt(2.0);
  for (Eigen::Index j = 0; j < m; ++j) {
    if (j >= local_cut && j < local_cut + r) continue;
    h.block(local_cut, j, r, 1) *= w;
    h.block(j, local_cut, 1, r) *= w;
  }
  return h;
}

DiracOperator build_aps_halfline(const DiracOperator& a, int cut, Side side, bool dual,
                                 const CutOptions& options) {
  const BoundaryOperator b = restrict_to_boundary(a, cut, options);
  const Matrix b_side = (side == Side::right) ? b.matrix : Matrix(-b.matrix);

  Eigen::SelfAdjointEigenSolver<Matrix> es(b_side);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    const double mu = es.eigenvalues()(k);
    const bool kept = dual ? (mu <= options.kernel_tol) : (mu < -options.kernel_tol);
    if (kept) keep.push_back(k);
  }

  const Matrix h = half_grid_restriction(a, cut, side);
  const int r = a.bundle_rank;
  const Eigen::Index m = h.rows();
  const Eigen::Index local_cut = (side == Side::left) ? m - r : 0;
  const Eigen::Index constrained = r - static_cast<Eigen::Index>(keep.size());

  // Orthonormal basis of the constraint subspace in nodal order.
  Matrix q = Matrix::Zero(m, m - constrained);
  Eigen::Index col = 0;
  for (Eigen::Index row = 0; row < m;) {
    if (row == local_cut) {
      for (Eigen::Index k : keep) q.block(local_cut, col++, r, 1) = es.eigenvectors().col(k);
      row += r;
    } else {
      q(row++, col++) = 1.0;
    }
  }

  DiracOperator out;
  out.matrix = q.adjoint() * h * q;
  out.matrix = (0.5 * (out.matrix + out.matrix.adjoint())).eval();
  out.bundle_rank = 1;
  out.manifold_dim = 1;
  Grid g;
  g.dim = 1;
  g.points_per_axis = static_cast<int>(m / r);
  g.spacing = a.grid->spacing;
  g.topology = Topology::half_line;
  const std::vector<int> nodes = half_grid_nodes(a, cut, side);
  g.origin_offset = {a.grid->coordinate(nodes.front(), 0)};
  out.grid = g;
  out.scheme = a.scheme;
  out.constraint_subspace = std::move(q);
  return out;
}

}  // namespace spectral_eta
