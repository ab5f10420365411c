#include "kktspectra/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "kktspectra/errors.hpp"

namespace kkt::lp {
namespace {

constexpr int kMaxPivots = 200000;

// Tableau in the form  T * [x; 1] with the objective in the last row.
// Row r < m holds basic variable basis[r] = T(r, last).
struct Tableau {
  Mat t;
  std::vector<Index> basis;
  Index cols() const { return t.cols() - 1; }
  Index rows() const { return t.rows() - 1; }

  void pivot(Index r, Index c) {
    t.row(r) /= t(r, c);
    for (Index i = 0; i < t.rows(); ++i) {
      if (i != r && t(i, c) != 0.0) t.row(i) -= t(i, c) * t.row(r);
    }
    basis[static_cast<size_t>(r)] = c;
  }

  // Minimizes the objective row over columns [0, active_cols). Returns false
  // when unbounded.
  bool run(Index active_cols, double tol, int& pivots) {
    const Index obj = rows();
    const Index rhs = cols();
    while (true) {
      Index enter = -1;
      for (Index c = 0; c < active_cols; ++c) {
        if (t(obj, c) < -tol) {
          enter = c;
          break;
        }
      }
      if (enter < 0) return true;
      Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Index r = 0; r < obj; ++r) {
        if (t(r, enter) > tol) {
          const double ratio = t(r, rhs) / t(r, enter);
          if (leave < 0 || ratio < best - tol) {
            best = ratio;
            leave = r;
          } else if (ratio <= best + tol &&
                     basis[static_cast<size_t>(r)] < basis[static_cast<size_t>(leave)]) {
            best = std::min(best, ratio);
            leave = r;
          }
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
      if (++pivots > kMaxPivots) throw NumericError("simplex pivot limit exceeded");
    }
  }
};

}  // namespace

Result solve(const Problem& pr, double tol) {
  const Index n = pr.num_vars;
  const Index m_eq = pr.a_eq.rows();
  const Index m_ge = pr.a_ge.rows();
  if ((m_eq && pr.a_eq.cols() != n) || (m_ge && pr.a_ge.cols() != n) ||
      pr.b_eq.size() != m_eq || pr.b_ge.size() != m_ge ||
      (pr.cost.size() != 0 && pr.cost.size() != n)) {
    throw InputError("LP dimensions are inconsistent");
  }
  const Index m = m_eq + m_ge;
  // Columns: u (n), v (n), slack (m_ge), artificial (m), rhs.
  const Index n_struct = 2 * n + m_ge;
  const Index n_total = n_struct + m;
  Tableau tab;
  tab.t = Mat::Zero(m + 1, n_total + 1);
  tab.basis.resize(static_cast<size_t>(m));
  for (Index r = 0; r < m; ++r) {
    Eigen::RowVectorXd row(n);
    double rhs;
    if (r < m_eq) {
      row = pr.a_eq.row(r);
      rhs = pr.b_eq(r);
    } else {
      row = pr.a_ge.row(r - m_eq);
      rhs = pr.b_ge(r - m_eq);
    }
    tab.t.block(r, 0, 1, n) = row;
    tab.t.block(r, n, 1, n) = -row;
    if (r >= m_eq) tab.t(r, 2 * n + (r - m_eq)) = -1.0;
    tab.t(r, n_total) = rhs;
    if (rhs < 0.0) tab.t.row(r) *= -1.0;
    tab.t(r, n_struct + r) = 1.0;
    tab.basis[static_cast<size_t>(r)] = n_struct + r;
  }

  Result res;
  // Phase one: minimize the sum of artificials.
  for (Index r = 0; r < m; ++r) {
    tab.t(m, n_struct + r) = 1.0;
    tab.t.row(m) -= tab.t.row(r);
  }
  tab.run(n_total, tol, res.pivots);
  res.infeasibility = -tab.t(m, n_total);
  const double scale = 1.0 + (m ? tab.t.col(n_total).head(m).cwiseAbs().maxCoeff() : 0.0);
  if (res.infeasibility > tol * scale) {
    res.status = Status::Infeasible;
    return res;
  }
  res.infeasibility = std::max(0.0, res.infeasibility);

  // Drive remaining artificials out of the basis where possible.
  for (Index r = 0; r < m; ++r) {
    if (tab.basis[static_cast<size_t>(r)] < n_struct) continue;
    for (Index c = 0; c < n_struct; ++c) {
      if (std::abs(tab.t(r, c)) > tol) {
        tab.pivot(r, c);
        break;
      }
    }
  }

  // Phase two over structural columns only.
  tab.t.row(m).setZero();
  if (pr.cost.size() == n) {
    tab.t.block(m, 0, 1, n) = pr.cost.transpose();
    tab.t.block(m, n, 1, n) = -pr.cost.transpose();
    for (Index r = 0; r < m; ++r) {
      const Index b = tab.basis[static_cast<size_t>(r)];
      if (b < n_struct && tab.t(m, b) != 0.0) tab.t.row(m) -= tab.t(m, b) * tab.t.row(r);
    }
    if (!tab.run(n_struct, tol, res.pivots)) {
      res.status = Status::Unbounded;
      return res;
    }
  }

  Vec z = Vec::Zero(n_total);
  for (Index r = 0; r < m; ++r) z(tab.basis[static_cast<size_t>(r)]) = tab.t(r, n_total);
  res.x = z.head(n) - z.segment(n, n);
  res.objective = pr.cost.size() == n ? pr.cost.dot(res.x) : 0.0;
  res.status = Status::Optimal;
  return res;
}

}  // namespace kkt::lp
