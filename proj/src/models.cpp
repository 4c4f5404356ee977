#include "spectral_eta/models.hpp"

#include <algorithm>
#include <cmath>

#include "spectral_eta/error.hpp"
#include "spectral_eta/spectrum.hpp"

namespace spectral_eta {

namespace {

Complex complex_normal(Rng& rng) {
  std::normal_distribution<double> nd;
  return {nd(rng), nd(rng)};
}

constexpr int kMaxDraws = 1000;

}  // namespace

Matrix random_hermitian(int n, Rng& rng) {
  Matrix g(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) g(i, j) = complex_normal(rng);
  return (g + g.adjoint()) / std::sqrt(8.0 * n);
}

Matrix hermitian_with_spectrum(const std::vector<double>& eigenvalues, Rng& rng) {
  const int n = static_cast<int>(eigenvalues.size());
  Matrix g(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) g(i, j) = complex_normal(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int k = 0; k < n; ++k) {
    const double mag = std::abs(r(k, k));
    if (mag > 0.0) q.col(k) *= r(k, k) / mag;
  }
  Eigen::VectorXcd d(n);
  for (int k = 0; k < n; ++k) d(k) = eigenvalues[k];
  Matrix m = q * d.asDiagonal() * q.adjoint();
  return 0.5 * (m + m.adjoint());
}

std::vector<double> random_gapped_spectrum(int n, double gap, double radius, Rng& rng, int kernel) {
  std::uniform_real_distribution<double> mag(gap, radius);
  std::bernoulli_distribution sign(0.5);
  std::vector<double> out;
  for (int k = 0; k < n; ++k) out.push_back((sign(rng) ? 1.0 : -1.0) * mag(rng));
  out.insert(out.end(), kernel, 0.0);
  return out;
}

Matrix random_block(int n, int block, double scale, Rng& rng) {
  Matrix p = Matrix::Zero(n, n);
  p.topLeftCorner(block, block) = scale * random_hermitian(block, rng) * std::sqrt(static_cast<double>(block));
  return p;
}

double min_abs_eigenvalue(const Matrix& m) {
  return eigensolve(m, false).eigenvalues.cwiseAbs().minCoeff();
}

OperatorPair random_block_pair(int n, int block, Rng& rng, double min_gap) {
  for (int draw = 0; draw < kMaxDraws; ++draw) {
    const Matrix a0 = random_hermitian(n, rng);
    const Matrix a1 = a0 + random_block(n, block, 1.0, rng);
    if (min_gap > 0.0 && (min_abs_eigenvalue(a0) < min_gap || min_abs_eigenvalue(a1) < min_gap)) continue;
    return make_pair(DiracOperator::raw(a0), DiracOperator::raw(a1));
  }
  throw Error(Errc::config_error, "no random pair met the gap requirement");
}

std::vector<DiracOperator> random_block_triple(int n, int block, Rng& rng, double min_gap) {
  for (int draw = 0; draw < kMaxDraws; ++draw) {
    const Matrix a0 = hermitian_with_spectrum(random_gapped_spectrum(n, 2.0 * min_gap, 2.0, rng), rng);
    const Matrix a1 = a0 + random_block(n, block, 0.5, rng);
    const Matrix a2 = a0 + random_block(n, block, 0.5, rng);
    if (min_abs_eigenvalue(a1) < min_gap || min_abs_eigenvalue(a2) < min_gap) continue;
    return {DiracOperator::raw(a0), DiracOperator::raw(a1), DiracOperator::raw(a2)};
  }
  throw Error(Errc::config_error, "no random triple met the gap requirement");
}

OperatorPath random_block_path(int n, int block, Rng& rng, double min_gap) {
  for (int draw = 0; draw < kMaxDraws; ++draw) {
    const Matrix a0 = random_hermitian(n, rng);
    const Matrix p = random_block(n, block, 2.0, rng);
    if (min_abs_eigenvalue(a0) < min_gap || min_abs_eigenvalue(a0 + p) < min_gap) continue;
    return OperatorPath(DiracOperator::raw(a0), p);
  }
  throw Error(Errc::config_error, "no random path met the gap requirement");
}

OperatorPair random_kernel_pair(int n, int k0, int k1, Rng& rng) {
  const Matrix a0 = hermitian_with_spectrum(random_gapped_spectrum(n - k0, 0.3, 2.0, rng, k0), rng);
  const Matrix a1 = hermitian_with_spectrum(random_gapped_spectrum(n - k1, 0.3, 2.0, rng, k1), rng);
  return make_pair(DiracOperator::raw(a0), DiracOperator::raw(a1));
}

double Profile::operator()(const std::vector<double>& x) const {
  double d2 = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double c = k < center.size() ? center[k] : 0.0;
    d2 += (x[k] - c) * (x[k] - c);
  }
  const double d = std::sqrt(d2);
  switch (form) {
    case Form::zero: return 0.0;
    case Form::constant: return amplitude;
    case Form::abs: return amplitude * d;
    case Form::confining: {
      const double excess = std::max(0.0, d - width);
      return amplitude + growth * excess * excess;
    }
    case Form::bump: {
      if (d >= width) return 0.0;
      const double q = 1.0 - d2 / (width * width);
      return amplitude * q * q * q;
    }
    case Form::gaussian:
      if (cutoff > 0.0 && d >= cutoff) return 0.0;
      return amplitude * std::exp(-d2 / (width * width));
    case Form::samples: break;
  }
  throw Error(Errc::config_error, "sampled profiles have no pointwise formula");
}

std::vector<double> Profile::sample(const Grid& grid) const {
  const int nodes = grid.node_count();
  if (form == Form::samples) {
    if (static_cast<int>(values.size()) != nodes)
      throw Error(Errc::invalid_potential, "sample count does not match the grid");
    return values;
  }
  std::vector<double> out(nodes);
  std::vector<double> x(grid.dim);
  for (int node = 0; node < nodes; ++node) {
    for (int axis = 0; axis < grid.dim; ++axis) x[axis] = grid.coordinate(node, axis);
    out[node] = (*this)(x);
  }
  return out;
}

ExampleR2 ExampleR2::standard(int points, double length) {
  ExampleR2 e;
  e.grid = Grid::centered(2, points, length / points, Topology::periodic);
  e.f0.form = Profile::Form::abs;
  e.f0.amplitude = 1.0;
  e.patch.form = Profile::Form::gaussian;
  e.patch.amplitude = -3.0;
  e.patch.width = 1.5;
  e.patch.cutoff = 0.45 * length;
  return e;
}

DiracOperator ExampleR2::base() const {
  const std::vector<double> f = f0.sample(grid);
  return build_dirac_2d(grid, std::span<const double>(f), scheme);
}

OperatorPath ExampleR2::path() const {
  const std::vector<double> f = patch.sample(grid);
  return OperatorPath(base(), Potential::sigma3(f));
}

OperatorPair ExampleR2::pair() const {
  const std::vector<double> f = patch.sample(grid);
  return make_pair(base(), Potential::sigma3(f));
}

CutModel CutModel::standard(int points, double length) {
  CutModel m;
  m.grid = Grid::centered(1, points, length / points, Topology::truncated_line);
  m.cut = points / 2 + points / 16;
  m.mass = 1.0;
  m.plateau = length / 8.0;
  m.patch_sigma3.form = Profile::Form::bump;
  m.patch_sigma3.amplitude = -1.6;
  m.patch_sigma3.width = 2.0;
  m.patch_sigma3.center = {-length / 4.0};
  m.patch_scalar = m.patch_sigma3;
  m.patch_scalar.amplitude = 0.8;
  return m;
}

OperatorPair CutModel::pair() const {
  Profile confining;
  confining.form = Profile::Form::confining;
  confining.amplitude = mass;
  confining.width = plateau;
  const std::vector<double> v0 = confining.sample(grid);
  const std::vector<double> dv = patch_sigma3.sample(grid);
  const std::vector<double> w = patch_scalar.sample(grid);
  std::vector<double> v1(v0.size());
  for (std::size_t k = 0; k < v0.size(); ++k) v1[k] = v0[k] + dv[k];
  const DiracOperator a0 = build_dirac_1d(grid, Potential::sigma3(v0), DerivativeScheme::central_difference);
  const DiracOperator a1 = build_dirac_1d(grid, Potential::diagonal(w, v1), DerivativeScheme::central_difference);
  return make_pair(a0, a1);
}

}  // namespace spectral_eta
