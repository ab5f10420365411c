#include "kktspectra/conic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kktspectra/errors.hpp"
#include "kktspectra/lp.hpp"

namespace kkt {

Mat null_space(const Mat& a, double rel_tol) {
  const Index n = a.cols();
  if (a.rows() == 0) return Mat::Identity(n, n);
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullV);
  const Vec& s = svd.singularValues();
  const double cut = rel_tol * std::max(1.0, s.size() ? s(0) : 0.0);
  Index rank = 0;
  while (rank < s.size() && s(rank) > cut) ++rank;
  return svd.matrixV().rightCols(n - rank);
}

DirectionSearch find_nonzero_direction(const Mat& eq, const Mat& ge, const Mat& selector,
                                       double tol) {
  DirectionSearch out;
  out.infeasibility = std::numeric_limits<double>::infinity();
  const Mat basis = null_space(eq);
  if (basis.cols() == 0) return out;
  const Mat sel = selector * basis;

  // Normalize inequality rows; drop ones that vanish on the null space.
  Mat cons = ge.rows() ? Mat(ge * basis) : Mat(0, basis.cols());
  std::vector<Index> keep;
  for (Index r = 0; r < cons.rows(); ++r) {
    const double nr = cons.row(r).norm();
    if (nr > 1e-12) {
      cons.row(r) /= nr;
      keep.push_back(r);
    }
  }
  Mat ineq(static_cast<Index>(keep.size()), basis.cols());
  for (size_t k = 0; k < keep.size(); ++k) ineq.row(static_cast<Index>(k)) = cons.row(keep[k]);

  if (ineq.rows() == 0) {
    Index best = -1;
    double best_norm = 1e-9;
    for (Index j = 0; j < sel.cols(); ++j) {
      if (sel.col(j).norm() > best_norm) {
        best_norm = sel.col(j).norm();
        best = j;
      }
    }
    if (best >= 0) {
      out.found = true;
      out.v = basis.col(best) / best_norm;
      out.infeasibility = 0.0;
    }
    return out;
  }

  for (Index k = 0; k < sel.rows(); ++k) {
    const double rn = sel.row(k).norm();
    if (rn <= 1e-9) continue;
    for (double sign : {1.0, -1.0}) {
      lp::Problem pr;
      pr.num_vars = basis.cols();
      pr.a_eq = sign * sel.row(k) / rn;
      pr.b_eq = Vec::Ones(1);
      pr.a_ge = ineq;
      pr.b_ge = Vec::Zero(ineq.rows());
      const auto res = lp::solve(pr, tol);
      out.infeasibility = std::min(out.infeasibility, res.infeasibility);
      if (res.status == lp::Status::Optimal) {
        Vec v = basis * res.x;
        const double sn = (selector * v).norm();
        if (sn <= 1e-12) continue;
        out.found = true;
        out.v = v / sn;
        out.infeasibility = 0.0;
        return out;
      }
    }
  }
  return out;
}

std::vector<SymMat> orthonormalize(const std::vector<SymMat>& basis, double tol) {
  std::vector<SymMat> out;
  for (const auto& b : basis) {
    SymMat r = b;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : out) r -= inner(q, r) * q;
    const double nr = r.norm();
    if (nr > tol * std::max(1.0, b.norm())) out.push_back(r * (1.0 / nr));
  }
  return out;
}

MinEigBound maximize_min_eigenvalue(const std::vector<SymMat>& basis, bool trace_normalized,
                                    double threshold, int max_iter) {
  MinEigBound out;
  const Index m = static_cast<Index>(basis.size());
  if (m == 0) throw InputError("empty basis in maximize_min_eigenvalue");
  const Index k = basis.front().dim();
  out.lower = -std::numeric_limits<double>::infinity();
  out.upper = std::numeric_limits<double>::infinity();

  std::vector<Vec> cuts;
  for (Index j = 0; j < k; ++j) cuts.push_back(Vec::Unit(k, j));
  const double t_cap = std::sqrt(static_cast<double>(m)) + 1.0;

  for (int it = 0; it < max_iter; ++it) {
    out.iterations = it + 1;
    lp::Problem pr;
    pr.num_vars = m + 1;  // w, t
    const Index nc = static_cast<Index>(cuts.size());
    pr.a_ge = Mat::Zero(nc + 2 * m + 1, m + 1);
    pr.b_ge = Vec::Zero(nc + 2 * m + 1);
    for (Index c = 0; c < nc; ++c) {
      const Vec& v = cuts[static_cast<size_t>(c)];
      for (Index i = 0; i < m; ++i)
        pr.a_ge(c, i) = v.dot(basis[static_cast<size_t>(i)].full() * v);
      pr.a_ge(c, m) = -1.0;
    }
    for (Index i = 0; i < m; ++i) {
      pr.a_ge(nc + 2 * i, i) = 1.0;
      pr.b_ge(nc + 2 * i) = -1.0;
      pr.a_ge(nc + 2 * i + 1, i) = -1.0;
      pr.b_ge(nc + 2 * i + 1) = -1.0;
    }
    pr.a_ge(nc + 2 * m, m) = -1.0;
    pr.b_ge(nc + 2 * m) = -t_cap;
    if (trace_normalized) {
      pr.a_eq = Mat::Zero(1, m + 1);
      for (Index i = 0; i < m; ++i) pr.a_eq(0, i) = basis[static_cast<size_t>(i)].trace();
      pr.b_eq = Vec::Ones(1);
    }
    pr.cost = Vec::Zero(m + 1);
    pr.cost(m) = -1.0;
    const auto res = lp::solve(pr);
    if (res.status != lp::Status::Optimal) {
      if (res.status == lp::Status::Infeasible) {
        out.upper = -std::numeric_limits<double>::infinity();
        return out;
      }
      throw NumericError("cutting-plane LP unbounded");
    }
    out.upper = std::min(out.upper, res.x(m));
    SymMat elem(k);
    for (Index i = 0; i < m; ++i) elem += res.x(i) * basis[static_cast<size_t>(i)];
    auto [vecs, vals] = jacobi_eigen(elem);
    const double lmin = vals(k - 1);
    if (lmin > out.lower) {
      out.lower = lmin;
      out.element = elem;
    }
    if (out.lower > threshold || out.upper < threshold) return out;
    if (out.upper - out.lower <= 1e-11) return out;
    cuts.push_back(vecs.col(k - 1));
  }
  return out;
}

bool subspace_contains_pd(const std::vector<SymMat>& basis, Index dim) {
  if (dim == 0) return true;
  const auto ob = orthonormalize(basis);
  if (ob.empty()) return false;
  constexpr double kThreshold = 1e-9;
  const auto b = maximize_min_eigenvalue(ob, false, kThreshold);
  return b.lower > kThreshold;
}

std::optional<SymMat> subspace_nonzero_psd(const std::vector<SymMat>& basis, Index dim) {
  if (dim == 0) return std::nullopt;
  const auto ob = orthonormalize(basis);
  if (ob.empty()) return std::nullopt;
  constexpr double kThreshold = -1e-9;
  const auto b = maximize_min_eigenvalue(ob, true, kThreshold);
  if (b.lower >= kThreshold) return b.element;
  return std::nullopt;
}

}  // namespace kkt
