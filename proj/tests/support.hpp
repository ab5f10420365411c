#pragma once

#include <Eigen/Dense>
#include <random>

#include "kktspectra/problem.hpp"
#include "kktspectra/symmat.hpp"

namespace kkt::testing {

using Rng = std::mt19937_64;

inline Mat gaussian(Index r, Index c, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = n(rng);
  return m;
}

inline SymMat random_sym(Index p, Rng& rng) {
  return SymMat::symmetrized(gaussian(p, p, rng));
}

inline Mat random_orthogonal(Index p, Rng& rng) {
  Eigen::HouseholderQR<Mat> qr(gaussian(p, p, rng));
  Mat q = qr.householderQ();
  return q;
}

/// Q diag(d) Q^T with a random orthogonal Q.
inline SymMat with_spectrum(const Vec& d, Rng& rng) {
  return congruence_t(random_orthogonal(d.size(), rng), SymMat::diagonal(d));
}

/// Spectrum with npos positive, nzero zero, nneg negative eigenvalues in
/// [0.5, 3] magnitude.
inline Vec signed_spectrum(Index npos, Index nzero, Index nneg, Rng& rng) {
  std::uniform_real_distribution<double> u(0.5, 3.0);
  Vec d(npos + nzero + nneg);
  Index k = 0;
  for (Index i = 0; i < npos; ++i) d(k++) = u(rng);
  for (Index i = 0; i < nzero; ++i) d(k++) = 0.0;
  for (Index i = 0; i < nneg; ++i) d(k++) = -u(rng);
  return d;
}

/// PSD projection through Eigen's solver, independent of the library's
/// Jacobi implementation.
inline Mat reference_project_psd(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.transpose()));
  Vec l = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * l.asDiagonal() * es.eigenvectors().transpose();
}

/// Dense random data of the given shape; f_quad symmetric, B_ij = B_ji.
inline ProblemData random_problem(Index n, Index p, Rng& rng) {
  ProblemData pd = ProblemData::zeros(n, p);
  pd.f_lin = gaussian(n, 1, rng);
  const Mat q = gaussian(n, n, rng);
  pd.f_quad = 0.5 * (q + q.transpose());
  pd.g_const = random_sym(p, rng);
  for (Index i = 0; i < n; ++i) {
    pd.g_lin[static_cast<size_t>(i)] = random_sym(p, rng);
    for (Index j = i; j < n; ++j) {
      const SymMat b = random_sym(p, rng);
      pd.g_quad[static_cast<size_t>(i)][static_cast<size_t>(j)] = b;
      pd.g_quad[static_cast<size_t>(j)][static_cast<size_t>(i)] = b;
    }
  }
  return pd;
}

}  // namespace kkt::testing
