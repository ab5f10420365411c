#include "kktspectra/symmat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kktspectra/errors.hpp"

namespace kkt {

SymMat SymMat::symmetrized(const Mat& m) {
  SymMat s;
  s.m_ = 0.5 * (m + m.transpose());
  return s;
}

SymMat SymMat::from_full(const Mat& m, double rel_tol) {
  if (m.rows() != m.cols()) throw InputError("symmetric matrix must be square");
  if (!m.allFinite()) throw InputError("matrix has non-finite entries");
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = i + 1; j < m.cols(); ++j) {
      const double scale = std::max(1.0, std::abs(m(i, j)));
      if (std::abs(m(i, j) - m(j, i)) > rel_tol * scale) {
        throw InputError("matrix is not symmetric at (" + std::to_string(i) +
                         "," + std::to_string(j) + ")");
      }
    }
  }
  return symmetrized(m);
}

SymMat SymMat::from_row_major(std::span<const double> values, Index p,
                              double rel_tol) {
  if (static_cast<Index>(values.size()) != p * p) {
    throw InputError("expected " + std::to_string(p * p) +
                     " row-major entries, got " + std::to_string(values.size()));
  }
  Mat m(p, p);
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < p; ++j) m(i, j) = values[i * p + j];
  return from_full(m, rel_tol);
}

SymMat SymMat::identity(Index p) {
  SymMat s;
  s.m_ = Mat::Identity(p, p);
  return s;
}

SymMat SymMat::diagonal(const Vec& d) {
  SymMat s;
  s.m_ = d.asDiagonal();
  return s;
}

SymMat SymMat::diagonal(std::initializer_list<double> d) {
  Vec v(static_cast<Index>(d.size()));
  Index k = 0;
  for (double x : d) v(k++) = x;
  return diagonal(v);
}

SymMat SymMat::from_svec(const Vec& v, Index p) {
  if (v.size() != svec_size(p)) throw InputError("svec length mismatch");
  SymMat s(p);
  Index k = 0;
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i <= j; ++i) {
      s.set(i, j, i == j ? v(k) : v(k) / std::sqrt(2.0));
      ++k;
    }
  }
  return s;
}

std::vector<double> SymMat::row_major() const {
  std::vector<double> out;
  out.reserve(static_cast<size_t>(dim() * dim()));
  for (Index i = 0; i < dim(); ++i)
    for (Index j = 0; j < dim(); ++j) out.push_back(m_(i, j));
  return out;
}

Vec SymMat::svec() const {
  Vec v(svec_size(dim()));
  Index k = 0;
  for (Index j = 0; j < dim(); ++j)
    for (Index i = 0; i <= j; ++i)
      v(k++) = i == j ? m_(i, j) : std::sqrt(2.0) * m_(i, j);
  return v;
}

SymMat& SymMat::operator+=(const SymMat& o) {
  if (o.dim() != dim()) throw InputError("dimension mismatch in SymMat +");
  m_ += o.m_;
  return *this;
}

SymMat& SymMat::operator-=(const SymMat& o) {
  if (o.dim() != dim()) throw InputError("dimension mismatch in SymMat -");
  m_ -= o.m_;
  return *this;
}

SymMat& SymMat::operator*=(double c) {
  m_ *= c;
  return *this;
}

double inner(const SymMat& a, const SymMat& b) {
  if (a.dim() != b.dim()) throw InputError("dimension mismatch in inner");
  return a.full().cwiseProduct(b.full()).sum();
}

SymMat congruence(const Mat& q, const SymMat& a) {
  return SymMat::symmetrized(q.transpose() * a.full() * q);
}

SymMat congruence_t(const Mat& q, const SymMat& a) {
  return SymMat::symmetrized(q * a.full() * q.transpose());
}

std::pair<Mat, Vec> jacobi_eigen(const SymMat& sm) {
  if (!sm.all_finite()) throw InputError("matrix has non-finite entries");
  const Index p = sm.dim();
  Mat a = sm.full();
  Mat v = Mat::Identity(p, p);
  const double fro = a.norm();
  const double target = 1e-14 * fro;

  auto off_norm = [&] {
    double s = 0.0;
    for (Index i = 0; i < p; ++i)
      for (Index j = 0; j < p; ++j)
        if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  constexpr int kMaxSweeps = 64;
  int sweep = 0;
  while (off_norm() > target) {
    if (sweep++ == kMaxSweeps) {
      throw NumericError("Jacobi eigen-iteration did not converge in 64 sweeps");
    }
    for (Index i = 0; i < p - 1; ++i) {
      for (Index j = i + 1; j < p; ++j) {
        const double aij = a(i, j);
        if (aij == 0.0) continue;
        // Symmetric Schur rotation annihilating a(i, j).
        const double tau = (a(j, j) - a(i, i)) / (2.0 * aij);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (Index k = 0; k < p; ++k) {
          const double aki = a(k, i), akj = a(k, j);
          a(k, i) = c * aki - s * akj;
          a(k, j) = s * aki + c * akj;
        }
        for (Index k = 0; k < p; ++k) {
          const double aik = a(i, k), ajk = a(j, k);
          a(i, k) = c * aik - s * ajk;
          a(j, k) = s * aik + c * ajk;
        }
        a(i, j) = 0.0;
        a(j, i) = 0.0;
        for (Index k = 0; k < p; ++k) {
          const double vki = v(k, i), vkj = v(k, j);
          v(k, i) = c * vki - s * vkj;
          v(k, j) = s * vki + c * vkj;
        }
      }
    }
  }

  std::vector<Index> order(static_cast<size_t>(p));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index x, Index y) { return a(x, x) > a(y, y); });
  Mat p_sorted(p, p);
  Vec l_sorted(p);
  for (Index k = 0; k < p; ++k) {
    p_sorted.col(k) = v.col(order[static_cast<size_t>(k)]);
    l_sorted(k) = a(order[static_cast<size_t>(k)], order[static_cast<size_t>(k)]);
  }
  return {p_sorted, l_sorted};
}

double default_zero_tol(const Vec& lambda) {
  const double spectrum = lambda.size() ? lambda.cwiseAbs().maxCoeff() : 0.0;
  return 1e-8 * std::max(1.0, spectrum);
}

Mat sigma_matrix(const Vec& lambda, double tol_zero) {
  const Index p = lambda.size();
  Vec l = lambda;
  for (Index i = 0; i < p; ++i)
    if (std::abs(l(i)) <= tol_zero) l(i) = 0.0;
  Mat s(p, p);
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < p; ++j) {
      const double den = l(i) - l(j);
      const double num = std::max(l(i), 0.0) - std::max(l(j), 0.0);
      s(i, j) = den == 0.0 ? 1.0 : num / den;
    }
  }
  return s;
}

SpectralDecomp spectral_decompose(const SymMat& m, double tol_zero) {
  if (tol_zero < 0.0) throw InputError("tol_zero must be nonnegative");
  auto [p, lambda] = jacobi_eigen(m);
  SpectralDecomp d;
  d.source = m;
  d.P = std::move(p);
  d.lambda = std::move(lambda);
  d.tol_zero = tol_zero;
  for (Index i = 0; i < d.lambda.size(); ++i) {
    if (d.lambda(i) > tol_zero)
      d.alpha.push_back(i);
    else if (d.lambda(i) < -tol_zero)
      d.gamma.push_back(i);
    else
      d.beta.push_back(i);
  }
  d.sigma = sigma_matrix(d.lambda, tol_zero);
  return d;
}

SpectralDecomp spectral_decompose(const SymMat& m) {
  auto [p, lambda] = jacobi_eigen(m);
  return spectral_decompose(m, default_zero_tol(lambda));
}

SymMat project_psd(const SpectralDecomp& d) {
  Vec clamped = d.lambda.cwiseMax(0.0);
  return SymMat::symmetrized(d.P * clamped.asDiagonal() * d.P.transpose());
}

SymMat project_psd(const SymMat& m) {
  auto [p, lambda] = jacobi_eigen(m);
  Vec clamped = lambda.cwiseMax(0.0);
  return SymMat::symmetrized(p * clamped.asDiagonal() * p.transpose());
}

SymMat project_nsd(const SymMat& m) { return m - project_psd(m); }

SymMat dir_deriv_projection(const SpectralDecomp& d, const SymMat& h) {
  if (h.dim() != d.dim()) throw InputError("dimension mismatch in dir_deriv_projection");
  const SymMat ht = d.to_basis(h);
  SymMat rt(d.dim());
  for (Index i : d.alpha) {
    for (Index j : d.alpha) rt.set(i, j, ht(i, j));
    for (Index j : d.beta) rt.set(i, j, ht(i, j));
    for (Index j : d.gamma) rt.set(i, j, d.sigma(i, j) * ht(i, j));
  }
  if (!d.beta.empty()) {
    const SymMat bb = project_psd(principal(ht, d.beta));
    for (size_t a = 0; a < d.beta.size(); ++a)
      for (size_t b = 0; b < d.beta.size(); ++b)
        rt.set(d.beta[a], d.beta[b], bb(static_cast<Index>(a), static_cast<Index>(b)));
  }
  return d.from_basis(rt);
}

SymMat dir_deriv_projection(const SymMat& a, const SymMat& h) {
  if (h.dim() != a.dim()) throw InputError("dimension mismatch in dir_deriv_projection");
  return dir_deriv_projection(spectral_decompose(a), h);
}

SymMat pseudoinverse(const SymMat& m, double tol_zero) {
  auto [p, lambda] = jacobi_eigen(m);
  Vec inv(lambda.size());
  for (Index i = 0; i < lambda.size(); ++i)
    inv(i) = std::abs(lambda(i)) > tol_zero ? 1.0 / lambda(i) : 0.0;
  return SymMat::symmetrized(p * inv.asDiagonal() * p.transpose());
}

SymMat pseudoinverse(const SymMat& m) {
  auto [p, lambda] = jacobi_eigen(m);
  return pseudoinverse(m, default_zero_tol(lambda));
}

double min_eigenvalue(const SymMat& m) {
  if (m.dim() == 0) return 0.0;
  return jacobi_eigen(m).second.minCoeff();
}

double max_eigenvalue(const SymMat& m) {
  if (m.dim() == 0) return 0.0;
  return jacobi_eigen(m).second.maxCoeff();
}

Mat block(const Mat& m, std::span<const Index> rows, std::span<const Index> cols) {
  Mat out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (size_t a = 0; a < rows.size(); ++a)
    for (size_t b = 0; b < cols.size(); ++b)
      out(static_cast<Index>(a), static_cast<Index>(b)) = m(rows[a], cols[b]);
  return out;
}

SymMat principal(const SymMat& m, std::span<const Index> idx) {
  return SymMat::symmetrized(block(m.full(), idx, idx));
}

std::vector<Index> concat(std::span<const Index> a, std::span<const Index> b) {
  std::vector<Index> out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace kkt
