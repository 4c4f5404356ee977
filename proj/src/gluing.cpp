#include "spectral_eta/gluing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "spectral_eta/error.hpp"
#include "spectral_eta/parallel.hpp"

namespace spectral_eta {

namespace {

// Q^H d Q where Q is the identity except on rows [b0, b0 + w), which are
// replaced by the columns of k (w × c).
Matrix compress(const Matrix& d, Eigen::Index b0, Eigen::Index w, const Matrix& k) {
  const Eigen::Index m = d.rows();
  const Eigen::Index c = k.cols();
  const Eigen::Index tail = m - b0 - w;
  const Eigen::Index out_dim = m - w + c;
  Matrix t(m, out_dim);
  t.leftCols(b0) = d.leftCols(b0);
  t.middleCols(b0, c) = d.middleCols(b0, w) * k;
  t.rightCols(tail) = d.rightCols(tail);
  Matrix out(out_dim, out_dim);
  out.topRows(b0) = t.topRows(b0);
  out.middleRows(b0, c) = k.adjoint() * t.middleRows(b0, w);
  out.bottomRows(tail) = t.bottomRows(tail);
  return 0.5 * (out + out.adjoint());
}

Matrix spectral_projection(const Matrix& b, bool positive) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(b);
  Matrix p = Matrix::Zero(b.rows(), b.cols());
  for (Eigen::Index k = 0; k < b.rows(); ++k)
    if ((es.eigenvalues()(k) > 0.0) == positive) p += es.eigenvectors().col(k) * es.eigenvectors().col(k).adjoint();
  return p;
}

}  // namespace

Matrix ThetaBVP::unitary() const {
  const Matrix id = pi_plus + pi_minus;
  return std::cos(theta) * id + std::sin(theta) * (pi_plus - pi_minus) * tau;
}

double ThetaBVP::unitarity_defect() const {
  const Matrix u = unitary();
  return (u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

ThetaBVP build_theta_bvp(const DiracOperator& a, int cut, double theta, const CutOptions& options) {
  if (!(std::abs(theta) < 0.5 * std::numbers::pi))
    throw Error(Errc::invalid_theta, "theta must lie in (-pi/2, pi/2)");
  ThetaBVP bvp;
  bvp.theta = theta;
  bvp.boundary = restrict_to_boundary(a, cut, options);
  const int r = a.bundle_rank;

  bvp.boundary_doubled = Matrix::Zero(2 * r, 2 * r);
  bvp.boundary_doubled.topLeftCorner(r, r) = bvp.boundary.matrix;
  bvp.boundary_doubled.bottomRightCorner(r, r) = -bvp.boundary.matrix;
  bvp.tau = Matrix::Zero(2 * r, 2 * r);
  bvp.tau.topRightCorner(r, r) = Matrix::Identity(r, r);
  bvp.tau.bottomLeftCorner(r, r) = Matrix::Identity(r, r);
  bvp.pi_plus = spectral_projection(bvp.boundary_doubled, true);
  bvp.pi_minus = spectral_projection(bvp.boundary_doubled, false);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  bvp.pi_theta = c * c * bvp.pi_plus + s * s * bvp.pi_minus -
                 0.5 * std::sin(2.0 * theta) * bvp.tau * (bvp.pi_plus + bvp.pi_minus);

  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (bvp.pi_theta + bvp.pi_theta.adjoint()));
  std::vector<Eigen::Index> kernel;
  for (Eigen::Index k = 0; k < 2 * r; ++k)
    if (es.eigenvalues()(k) < 0.5) kernel.push_back(k);
  // Kernel basis in (s_R, s_L) order, reordered to the nodal (s_L, s_R) layout.
  Matrix k_rl(2 * r, static_cast<Eigen::Index>(kernel.size()));
  for (std::size_t j = 0; j < kernel.size(); ++j) k_rl.col(j) = es.eigenvectors().col(kernel[j]);
  Matrix k_nodal(2 * r, k_rl.cols());
  k_nodal.topRows(r) = k_rl.bottomRows(r);
  k_nodal.bottomRows(r) = k_rl.topRows(r);

  const Matrix left = half_grid_restriction(a, cut, Side::left);
  const Matrix right = half_grid_restriction(a, cut, Side::right);
  const Eigen::Index ml = left.rows();
  const Eigen::Index m = ml + right.rows();
  Matrix doubled = Matrix::Zero(m, m);
  doubled.topLeftCorner(ml, ml) = left;
  doubled.bottomRightCorner(right.rows(), right.rows()) = right;

  bvp.op.matrix = compress(doubled, ml - r, 2 * r, k_nodal);
  bvp.op.bundle_rank = 1;
  bvp.op.manifold_dim = a.manifold_dim;
  bvp.op.scheme = a.scheme;
  bvp.op.constraint_subspace = std::move(k_rl);
  return bvp;
}

Eigen::VectorXd aps_dual_union_spectrum(const DiracOperator& a, int cut, const CutOptions& options) {
  const Spectrum right = eigensolve(build_aps_halfline(a, cut, Side::right, false, options), false);
  const Spectrum left = eigensolve(build_aps_halfline(a, cut, Side::left, true, options), false);
  Eigen::VectorXd all(right.eigenvalues.size() + left.eigenvalues.size());
  all << right.eigenvalues, left.eigenvalues;
  std::sort(all.begin(), all.end());
  return all;
}

double multiset_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  Eigen::VectorXd x = a;
  Eigen::VectorXd y = b;
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  return x.size() ? (x - y).cwiseAbs().maxCoeff() : 0.0;
}

ThetaScan theta_xi_scan(const OperatorPair& pair, int cut, const std::vector<double>& thetas,
                        const EtaConfig& config, const CutOptions& options) {
  const Spectrum s0 = eigensolve(pair.a0, false);
  const int n = pair.a0.manifold_dim;
  ThetaScan scan;
  scan.points.resize(thetas.size());
  parallel_for(thetas.size(), [&](std::size_t j) {
    ThetaScanPoint& p = scan.points[j];
    p.theta = thetas[j];
    const ThetaBVP bvp = build_theta_bvp(pair.a1, cut, p.theta, options);
    p.eta = relative_eta_invariant(PairSpectra{s0, eigensolve(bvp.op, false)}, n, config);
    p.xi = reduced_eta(p.eta);
  });

  for (std::size_t j = 0; j < scan.points.size(); ++j) {
    auto& p = scan.points[j];
    p.xi_bar = j == 0 ? p.xi - std::floor(p.xi)
                      : p.xi - std::round(p.xi - scan.points[j - 1].xi_bar);
  }
  const auto ref = std::find_if(scan.points.begin(), scan.points.end(), [](const ThetaScanPoint& p) {
    return std::abs(p.theta - 0.25 * std::numbers::pi) < 1e-12;
  });
  if (ref != scan.points.end()) {
    for (const auto& p : scan.points) scan.sup_variation = std::max(scan.sup_variation, std::abs(p.xi_bar - ref->xi_bar));
  } else if (!scan.points.empty()) {
    const auto [lo, hi] = std::minmax_element(scan.points.begin(), scan.points.end(),
                                              [](const auto& a, const auto& b) { return a.xi_bar < b.xi_bar; });
    scan.sup_variation = hi->xi_bar - lo->xi_bar;
  }
  return scan;
}

double compact_xi(const Spectrum& s) { return 0.5 * (eta_direct(s, 0.0).real() + kernel_dim(s)); }

double distance_to_lattice(double x, double period) { return std::abs(x - period * std::round(x / period)); }

GluingResult gluing_check(const OperatorPair& pair, int cut, const EtaConfig& config, const CutOptions& options) {
  GluingResult g;
  const bool any_left = std::any_of(pair.diff_support.begin(), pair.diff_support.end(), [&](int k) { return k <= cut; });
  const bool any_right = std::any_of(pair.diff_support.begin(), pair.diff_support.end(), [&](int k) { return k >= cut; });
  if (any_left && any_right)
    throw Error(Errc::not_product_near_cut, "difference support meets the cut or lies on both sides of it");
  g.side = any_right ? Side::right : Side::left;

  g.eta = relative_eta_invariant(pair, config);
  g.xi_pair = reduced_eta(g.eta);
  g.xi_piece_1 = compact_xi(eigensolve(build_aps_halfline(pair.a1, cut, g.side, false, options), false));
  g.xi_piece_0 = compact_xi(eigensolve(build_aps_halfline(pair.a0, cut, g.side, false, options), false));
  g.residual = distance_to_lattice(g.xi_pair - g.xi_piece_1 + g.xi_piece_0, 1.0);
  return g;
}

Mod2Result mod2z_check(const OperatorPair& pair, const EtaConfig& config, const FlowOptions& flow) {
  Mod2Result m;
  m.eta = relative_eta_invariant(pair, config);
  const OperatorPath path(pair.a0, Matrix(pair.a1.matrix - pair.a0.matrix));
  m.flow = spectral_flow(path, flow);
  m.predicted = 2.0 * m.flow.sf - m.eta.kernel_dim_a1 + m.eta.kernel_dim_a0;
  m.residual = std::abs(m.eta.finite_part - m.predicted);
  m.residual_mod2 = distance_to_lattice(m.eta.finite_part - m.predicted, 2.0);
  return m;
}

}  // namespace spectral_eta
