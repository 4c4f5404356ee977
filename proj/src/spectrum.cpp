#include "spectral_eta/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <complex>
#define LAPACK_COMPLEX_CUSTOM
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "spectral_eta/error.hpp"

namespace spectral_eta {

namespace {

constexpr double kSelfAdjointTol = 1e-12;
// Below this size the dense Eigen path is always used.
constexpr Eigen::Index kLapackThreshold = 96;

Eigen::Index bandwidth(const Matrix& m) {
  Eigen::Index kd = 0;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = m.rows() - 1; i > j + kd; --i)
      if (m(i, j) != Complex(0.0)) {
        kd = i - j;
        break;
      }
  return kd;
}

void check_info(lapack_int info, const char* routine) {
  if (info != 0)
    throw Error(Errc::not_self_adjoint,
                std::string(routine) + " failed with info " + std::to_string(info));
}

// Lower band storage: ab(kd + i − j, j) in the column-major (kd+1)×n array.
Spectrum solve_banded(const Matrix& m, Eigen::Index kd, bool want_vectors) {
  const lapack_int n = static_cast<lapack_int>(m.rows());
  const lapack_int ldab = static_cast<lapack_int>(kd + 1);
  std::vector<lapack_complex_double> ab(static_cast<std::size_t>(ldab) * n);
  for (lapack_int j = 0; j < n; ++j)
    for (lapack_int i = j; i < std::min<lapack_int>(n, j + ldab); ++i) {
      const Complex z = m(i, j);
      ab[static_cast<std::size_t>(j) * ldab + (i - j)] = z;
    }
  Spectrum s;
  s.eigenvalues.resize(n);
  Matrix z;
  if (want_vectors) z.resize(n, n);
  const lapack_int info = LAPACKE_zhbevd(LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', 'L', n,
                                         static_cast<lapack_int>(kd), ab.data(), ldab,
                                         s.eigenvalues.data(),
                                         want_vectors ? z.data()
                                                      : nullptr,
                                         n);
  check_info(info, "zhbevd");
  if (want_vectors) s.eigenvectors = std::move(z);
  return s;
}

Spectrum solve_dense(const Matrix& m, bool want_vectors) {
  Spectrum s;
  if (!want_vectors || m.rows() < kLapackThreshold) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, want_vectors ? Eigen::ComputeEigenvectors
                                                             : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error(Errc::not_self_adjoint, "eigen solver did not converge");
    s.eigenvalues = es.eigenvalues();
    if (want_vectors) s.eigenvectors = es.eigenvectors();
    return s;
  }
  Matrix z = m;
  const lapack_int n = static_cast<lapack_int>(m.rows());
  s.eigenvalues.resize(n);
  const lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n,
                                         z.data(), n,
                                         s.eigenvalues.data());
  check_info(info, "zheevd");
  s.eigenvectors = std::move(z);
  return s;
}

}  // namespace

Spectrum Spectrum::from_values(std::vector<double> values, double kernel_tol) {
  std::sort(values.begin(), values.end());
  Spectrum s;
  s.eigenvalues = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  s.kernel_tol = kernel_tol;
  s.source_dim = s.eigenvalues.size();
  return s;
}

double Spectrum::spectral_radius() const {
  return eigenvalues.size() == 0 ? 0.0 : eigenvalues.cwiseAbs().maxCoeff();
}

double Spectrum::kernel_threshold() const { return kernel_tol * (1.0 + spectral_radius()); }

int Spectrum::negative_count() const {
  const double thr = kernel_threshold();
  return static_cast<int>(std::count_if(eigenvalues.begin(), eigenvalues.end(),
                                        [thr](double l) { return l <= -thr; }));
}

int Spectrum::positive_count() const {
  const double thr = kernel_threshold();
  return static_cast<int>(std::count_if(eigenvalues.begin(), eigenvalues.end(),
                                        [thr](double l) { return l >= thr; }));
}

Spectrum eigensolve(const Matrix& m, bool want_vectors, double kernel_tol) {
  if (m.rows() != m.cols()) throw Error(Errc::not_self_adjoint, "matrix is not square");
  const double defect = hermiticity_defect(m);
  if (defect >= kSelfAdjointTol)
    throw Error(Errc::not_self_adjoint, "Hermiticity defect " + std::to_string(defect));

  const Matrix h = 0.5 * (m + m.adjoint());
  Spectrum s;
  const Eigen::Index kd = bandwidth(h);
  if (h.rows() >= kLapackThreshold && kd * 16 <= h.rows())
    s = solve_banded(h, kd, want_vectors);
  else
    s = solve_dense(h, want_vectors);
  s.kernel_tol = kernel_tol;
  s.source_dim = m.rows();
  return s;
}

Spectrum eigensolve(const DiracOperator& a, bool want_vectors, double kernel_tol) {
  return eigensolve(a.matrix, want_vectors, kernel_tol);
}

PairSpectra eigensolve(const OperatorPair& pair, bool want_vectors, double kernel_tol) {
  return PairSpectra{eigensolve(pair.a0, want_vectors, kernel_tol), eigensolve(pair.a1, want_vectors, kernel_tol)};
}

int kernel_dim(const Spectrum& s) {
  const double thr = s.kernel_threshold();
  return static_cast<int>(std::count_if(s.eigenvalues.begin(), s.eigenvalues.end(),
                                        [thr](double l) { return std::abs(l) < thr; }));
}

namespace {
void check_time(double t) {
  if (!(t > 0.0)) throw Error(Errc::invalid_time, "t must be positive");
}
}  // namespace

double heat_trace(const Spectrum& s, double t) {
  check_time(t);
  double acc = 0.0;
  for (double l : s.eigenvalues) acc += std::exp(-t * l * l);
  return acc;
}

double eta_trace(const Spectrum& s, double t) {
  check_time(t);
  double acc = 0.0;
  for (double l : s.eigenvalues) acc += l * std::exp(-t * l * l);
  return acc;
}

double relative_trace(const PairSpectra& pair, double t, bool weighted) {
  return weighted ? eta_trace(pair.a1, t) - eta_trace(pair.a0, t)
                  : heat_trace(pair.a1, t) - heat_trace(pair.a0, t);
}

double spectral_gap(const PairSpectra& pair) {
  double gap = std::numeric_limits<double>::infinity();
  for (const Spectrum* s : {&pair.a0, &pair.a1}) {
    bool found = false;
    for (double l : s->eigenvalues)
      if (!s->is_kernel(l)) {
        gap = std::min(gap, std::abs(l));
        found = true;
      }
    if (!found) throw Error(Errc::degenerate_spectrum, "spectrum lies entirely in the kernel");
  }
  return gap;
}

std::vector<double> log_spaced(double t_lo, double t_hi, int count) {
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = t_lo;
    return out;
  }
  const double a = std::log(t_lo);
  const double b = std::log(t_hi);
  for (int i = 0; i < count; ++i) out[i] = std::exp(a + (b - a) * i / (count - 1));
  return out;
}

}  // namespace spectral_eta
