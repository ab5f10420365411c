#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace kkt {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Dense real symmetric matrix. Symmetry is structural: every write goes to
/// both (i,j) and (j,i), so the materialized matrix equals its transpose
/// bit for bit.
class SymMat {
 public:
  SymMat() = default;
  explicit SymMat(Index p) : m_(Mat::Zero(p, p)) {}

  /// Averages M with its transpose. No symmetry check.
  static SymMat symmetrized(const Mat& m);
  /// Checks |m_ij - m_ji| <= rel_tol * max(1, |m_ij|) and finiteness, then
  /// averages. Throws InputError otherwise.
  static SymMat from_full(const Mat& m, double rel_tol = 1e-12);
  /// Reads p*p row-major values (the serialized form).
  static SymMat from_row_major(std::span<const double> values, Index p,
                               double rel_tol = 1e-12);
  static SymMat identity(Index p);
  static SymMat diagonal(const Vec& d);
  static SymMat diagonal(std::initializer_list<double> d);
  /// Inverse of svec().
  static SymMat from_svec(const Vec& v, Index p);

  Index dim() const { return m_.rows(); }
  double operator()(Index i, Index j) const { return m_(i, j); }
  void set(Index i, Index j, double v) {
    m_(i, j) = v;
    m_(j, i) = v;
  }
  const Mat& full() const { return m_; }

  /// Row-major p*p serialization.
  std::vector<double> row_major() const;
  /// Isometric vectorization of the upper triangle: off-diagonal entries are
  /// scaled by sqrt(2) so that svec(A).dot(svec(B)) == <A, B>.
  Vec svec() const;
  static Index svec_size(Index p) { return p * (p + 1) / 2; }

  bool all_finite() const { return m_.allFinite(); }
  double norm() const { return m_.norm(); }
  double trace() const { return m_.trace(); }

  SymMat& operator+=(const SymMat& o);
  SymMat& operator-=(const SymMat& o);
  SymMat& operator*=(double c);

  friend SymMat operator+(SymMat a, const SymMat& b) { return a += b; }
  friend SymMat operator-(SymMat a, const SymMat& b) { return a -= b; }
  friend SymMat operator*(SymMat a, double c) { return a *= c; }
  friend SymMat operator*(double c, SymMat a) { return a *= c; }
  friend SymMat operator-(SymMat a) { return a *= -1.0; }

 private:
  Mat m_;
};

/// Frobenius inner product.
double inner(const SymMat& a, const SymMat& b);
/// Q^T A Q, symmetrized.
SymMat congruence(const Mat& q, const SymMat& a);
/// Q A Q^T, symmetrized.
SymMat congruence_t(const Mat& q, const SymMat& a);

/// Eigen-decomposition of a symmetric matrix with the sign partition of its
/// spectrum. Eigenvalues are sorted in nonincreasing order, so index sets come
/// out as alpha (positive), beta (zero), gamma (negative) in that order.
struct SpectralDecomp {
  SymMat source;
  Mat P;       // columns are eigenvectors
  Vec lambda;  // nonincreasing
  std::vector<Index> alpha, beta, gamma;
  double tol_zero = 0.0;
  Mat sigma;   // divided-difference matrix of the eigenvalue clamp

  Index dim() const { return lambda.size(); }
  /// P^T H P.
  SymMat to_basis(const SymMat& h) const { return congruence(P, h); }
  /// P H P^T.
  SymMat from_basis(const SymMat& h) const { return congruence_t(P, h); }
};

/// Cyclic Jacobi eigen-solver. Returns eigenvectors (columns) and eigenvalues
/// sorted nonincreasing. Deterministic row-cyclic sweep order; throws
/// NumericError if 64 sweeps are not enough.
std::pair<Mat, Vec> jacobi_eigen(const SymMat& m);

/// 1e-8 * max(1, max |lambda|).
double default_zero_tol(const Vec& lambda);

SpectralDecomp spectral_decompose(const SymMat& m, double tol_zero);
/// Uses default_zero_tol of the computed spectrum.
SpectralDecomp spectral_decompose(const SymMat& m);

/// Entries (max(l_i,0) - max(l_j,0)) / (l_i - l_j) with 0/0 := 1. Only the
/// alpha x gamma block is consumed by the derivative formulas.
Mat sigma_matrix(const Vec& lambda, double tol_zero);
inline Mat sigma_matrix(const SpectralDecomp& d) { return d.sigma; }

SymMat project_psd(const SymMat& m);
SymMat project_psd(const SpectralDecomp& d);
SymMat project_nsd(const SymMat& m);

/// Directional derivative of the projection onto the PSD cone at A in the
/// direction H.
SymMat dir_deriv_projection(const SymMat& a, const SymMat& h);
SymMat dir_deriv_projection(const SpectralDecomp& d, const SymMat& h);

SymMat pseudoinverse(const SymMat& m, double tol_zero);
SymMat pseudoinverse(const SymMat& m);

double min_eigenvalue(const SymMat& m);
double max_eigenvalue(const SymMat& m);

/// Sub-block (rows I, cols J) of a full matrix.
Mat block(const Mat& m, std::span<const Index> rows, std::span<const Index> cols);
/// Symmetric principal sub-block.
SymMat principal(const SymMat& m, std::span<const Index> idx);
std::vector<Index> concat(std::span<const Index> a, std::span<const Index> b);

}  // namespace kkt
