#include "kktspectra/criticality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "kktspectra/conic.hpp"
#include "kktspectra/errors.hpp"

namespace kkt {
namespace {

// Largest beta block for which all 2^|beta| splits are enumerated.
constexpr Index kMaxSplitBits = 12;

Mat stack(const Mat& a, const Mat& b) {
  if (a.rows() == 0) return b;
  if (b.rows() == 0) return a;
  Mat out(a.rows() + b.rows(), a.cols());
  out << a, b;
  return out;
}

/// Linear rows of the derivative system over z = (xi, eta~ upper triangle).
/// The beta x beta complementarity is added per basis and split.
class BlockSystem {
 public:
  explicit BlockSystem(const CriticalitySystem& sys) : sys_(sys) {
    n_ = sys.n();
    p_ = sys.p();
    pos_ = Mat::Constant(p_, p_, -1);
    Index k = 0;
    for (Index a = 0; a < p_; ++a)
      for (Index b = a; b < p_; ++b) {
        pos_(a, b) = static_cast<double>(n_ + k);
        pos_(b, a) = static_cast<double>(n_ + k);
        ++k;
      }
    vars_ = n_ + k;
    build_base();
  }

  Index vars() const { return vars_; }
  Index n() const { return n_; }
  const Mat& base() const { return base_; }
  Mat selector() const {
    Mat s = Mat::Zero(n_, vars_);
    s.leftCols(n_).setIdentity();
    return s;
  }

  /// Rows for "Q^T M_bb Q and Q^T eta_bb Q are diagonal" and the split given
  /// by mask: bit k set -> (m_k >= 0, e_k = 0), clear -> (m_k = 0, e_k <= 0).
  void split_rows(const Mat& q, unsigned mask, Mat& eq, Mat& ge) const {
    const auto& beta = sys_.ctx.beta();
    const Index kb = static_cast<Index>(beta.size());
    std::vector<Vec> eqs, ges;
    for (Index k = 0; k < kb; ++k) {
      for (Index l = k; l < kb; ++l) {
        const Vec m = m_row(q.col(k), q.col(l));
        const Vec e = e_row(q.col(k), q.col(l));
        if (l != k) {
          eqs.push_back(m);
          eqs.push_back(e);
        } else if (mask & (1u << k)) {
          ges.push_back(m);
          eqs.push_back(e);
        } else {
          eqs.push_back(m);
          ges.push_back(-e);
        }
      }
    }
    eq = to_mat(eqs);
    ge = to_mat(ges);
  }

  Vec xi(const Vec& z) const { return z.head(n_); }
  SymMat eta(const Vec& z) const {
    SymMat et(p_);
    for (Index a = 0; a < p_; ++a)
      for (Index b = a; b < p_; ++b) et.set(a, b, z(static_cast<Index>(pos_(a, b))));
    return sys_.ctx.decomp.from_basis(et);
  }

 private:
  Index var(Index a, Index b) const { return static_cast<Index>(pos_(a, b)); }

  Mat to_mat(const std::vector<Vec>& rows) const {
    Mat m(static_cast<Index>(rows.size()), vars_);
    for (size_t r = 0; r < rows.size(); ++r) m.row(static_cast<Index>(r)) = rows[r].transpose();
    return m;
  }

  // u^T M_bb v as a row in z (M = sum xi_r D~_r).
  Vec m_row(const Vec& u, const Vec& v) const {
    const auto& beta = sys_.ctx.beta();
    Vec row = Vec::Zero(vars_);
    for (Index r = 0; r < n_; ++r) {
      const SymMat& d = sys_.jac_tilde[static_cast<size_t>(r)];
      double s = 0.0;
      for (size_t a = 0; a < beta.size(); ++a)
        for (size_t b = 0; b < beta.size(); ++b)
          s += u(static_cast<Index>(a)) * d(beta[a], beta[b]) * v(static_cast<Index>(b));
      row(r) = s;
    }
    return row;
  }

  // u^T eta_bb v as a row in z.
  Vec e_row(const Vec& u, const Vec& v) const {
    const auto& beta = sys_.ctx.beta();
    Vec row = Vec::Zero(vars_);
    for (size_t a = 0; a < beta.size(); ++a)
      for (size_t b = 0; b < beta.size(); ++b)
        row(var(beta[a], beta[b])) += u(static_cast<Index>(a)) * v(static_cast<Index>(b));
    return row;
  }

  void build_base() {
    const auto& ctx = sys_.ctx;
    const auto& jt = sys_.jac_tilde;
    std::vector<Vec> rows;
    // hessL xi + G'* eta = 0, with <D~_r, eta~> over the upper triangle
    for (Index r = 0; r < n_; ++r) {
      Vec row = Vec::Zero(vars_);
      row.head(n_) = sys_.hessL.row(r).transpose();
      for (Index a = 0; a < p_; ++a)
        for (Index b = a; b < p_; ++b)
          row(var(a, b)) += (a == b ? 1.0 : 2.0) * jt[static_cast<size_t>(r)](a, b);
      rows.push_back(row);
    }
    auto m_entry = [&](Index a, Index b) {
      Vec row = Vec::Zero(vars_);
      for (Index r = 0; r < n_; ++r) row(r) = jt[static_cast<size_t>(r)](a, b);
      return row;
    };
    auto e_entry = [&](Index a, Index b) {
      Vec row = Vec::Zero(vars_);
      row(var(a, b)) = 1.0;
      return row;
    };
    for (Index a : ctx.beta())
      for (Index b : ctx.gamma()) rows.push_back(m_entry(a, b));
    for (Index a : ctx.gamma())
      for (Index b : ctx.gamma())
        if (a <= b) rows.push_back(m_entry(a, b));
    for (Index a : ctx.alpha()) {
      for (Index b : ctx.alpha())
        if (a <= b) rows.push_back(e_entry(a, b));
      for (Index b : ctx.beta()) rows.push_back(e_entry(a, b));
      for (Index b : ctx.gamma()) {
        const double s = sys_.sigma(a, b);
        rows.push_back((s - 1.0) * m_entry(a, b) + s * e_entry(a, b));
      }
    }
    base_ = to_mat(rows);
  }

  const CriticalitySystem& sys_;
  Index n_ = 0, p_ = 0, vars_ = 0;
  Mat pos_;
  Mat base_;
};

/// Common eigenbasis of the beta blocks of the D~_r, if they commute.
std::optional<Mat> common_beta_basis(const CriticalitySystem& sys, std::mt19937_64& rng) {
  const auto& beta = sys.ctx.beta();
  const Index kb = static_cast<Index>(beta.size());
  if (kb <= 1) return Mat(Mat::Identity(kb, kb));
  std::vector<SymMat> blocks;
  double scale = 0.0;
  for (const auto& d : sys.jac_tilde) {
    blocks.push_back(principal(d, beta));
    scale = std::max(scale, blocks.back().norm());
  }
  std::normal_distribution<double> g(0.0, 1.0);
  SymMat comb(kb);
  for (const auto& b : blocks) comb += g(rng) * b;
  const Mat q = jacobi_eigen(comb).first;
  for (const auto& b : blocks) {
    Mat t = congruence(q, b).full();
    t.diagonal().setZero();
    if (t.norm() > 1e-10 * std::max(1.0, scale)) return std::nullopt;
  }
  return q;
}

Mat rotation(double theta) {
  Mat q(2, 2);
  q << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return q;
}

Mat random_orthogonal(Index k, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat m(k, k);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j) m(i, j) = g(rng);
  Eigen::HouseholderQR<Mat> qr(m);
  Mat q = qr.householderQ();
  return q;
}

struct Search {
  const CriticalitySystem& sys;
  const BlockSystem& bs;
  CriticalityVerdict& out;
  Mat sel;
  double best_rejected = std::numeric_limits<double>::infinity();

  // Tries every split for one basis. Returns true once a verified witness
  // is stored; the smallest phase-one infeasibility goes to `infeas`.
  bool try_basis(const Mat& q, double& infeas) {
    ++out.certificate.bases;
    infeas = std::numeric_limits<double>::infinity();
    const unsigned splits = 1u << q.cols();
    for (unsigned mask = 0; mask < splits; ++mask) {
      Mat eq, ge;
      bs.split_rows(q, mask, eq, ge);
      ++out.certificate.branches;
      ++out.certificate.lps;
      const auto ds = find_nonzero_direction(stack(bs.base(), eq), ge, sel);
      if (!ds.found) {
        infeas = std::min(infeas, ds.infeasibility);
        continue;
      }
      infeas = 0.0;
      if (accept(ds.v)) return true;
    }
    out.certificate.best_infeasibility = std::min(out.certificate.best_infeasibility, infeas);
    return false;
  }

  bool accept(const Vec& z) {
    Vec xi = bs.xi(z);
    SymMat eta = bs.eta(z);
    const double nx = xi.norm();
    if (nx <= 0.0) return false;
    xi /= nx;
    eta *= 1.0 / nx;
    const double r = witness_residual(sys, xi, eta);
    if (r > kWitnessTol) {
      best_rejected = std::min(best_rejected, r);
      return false;
    }
    out.tag = Verdict::Critical;
    out.xi = xi;
    out.eta = eta;
    out.residual = r;
    return true;
  }
};

}  // namespace

CriticalitySystem build_system(const ProblemData& pd, const KKTPoint& kkt) {
  return build_system(pd, kkt, -1.0);
}

CriticalitySystem build_system(const ProblemData& pd, const KKTPoint& kkt, double tol_zero,
                               double tol_feas) {
  const auto res = kkt_residual(pd, kkt.x, kkt.Y);
  if (res.max() > tol_feas) {
    std::ostringstream os;
    os << "not a certified KKT point (r1 = " << res.r1 << ", r2 = " << res.r2 << ")";
    throw InputError(os.str());
  }
  CriticalitySystem sys;
  sys.xbar = kkt.x;
  sys.ybar = kkt.Y;
  sys.hessL = lagrangian_hessian(pd, kkt.x, kkt.Y);
  sys.jac = eval_G_jacobian(pd, kkt.x);
  const SymMat a = eval_G(pd, kkt.x) + kkt.Y;
  sys.ctx = tol_zero < 0.0 ? ConeContext::from_sum(a) : ConeContext::from_sum(a, tol_zero);
  sys.sigma = sys.ctx.decomp.sigma;
  for (const auto& d : sys.jac) sys.jac_tilde.push_back(sys.ctx.decomp.to_basis(d));
  return sys;
}

double witness_residual(const CriticalitySystem& sys, const Vec& xi, const SymMat& eta) {
  if (xi.size() != sys.n() || eta.dim() != sys.p())
    throw InputError("witness has the wrong shape");
  const double r1 = (sys.hessL * xi + adjoint_apply(sys.jac, eta)).norm();
  const SymMat h1 = sys.n() ? jacobian_apply(sys.jac, xi) : SymMat(sys.p());
  const double r2 = (h1 - dir_deriv_projection(sys.ctx.decomp, h1 + eta)).norm();
  return r1 + r2;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Critical: return "Critical";
    case Verdict::Noncritical: return "Noncritical";
    case Verdict::Undetermined: return "Undetermined";
  }
  return "?";
}

std::string Certificate::describe() const {
  std::ostringstream os;
  os << method << (exhaustive ? " (exhaustive)" : "") << ": " << bases
     << " bases, " << branches << " branches, " << lps << " feasibility problems";
  if (!exhaustive && std::isfinite(best_infeasibility))
    os << ", best infeasibility " << best_infeasibility;
  return os.str();
}

CriticalityVerdict classify_multiplier(const CriticalitySystem& sys, const ClassifyOptions& opt) {
  CriticalityVerdict out;
  out.certificate.best_infeasibility = std::numeric_limits<double>::infinity();
  if (sys.n() == 0) {
    out.tag = Verdict::Noncritical;
    out.certificate.exhaustive = true;
    out.certificate.method = "linear";
    return out;
  }
  const BlockSystem bs(sys);
  Search search{sys, bs, out, bs.selector()};

  // The equalities alone may already force xi = 0.
  const Mat ns = null_space(bs.base());
  ++out.certificate.lps;
  if (ns.cols() == 0 || Eigen::JacobiSVD<Mat>(ns.topRows(bs.n())).singularValues()(0) <= 1e-9) {
    out.tag = Verdict::Noncritical;
    out.certificate.exhaustive = true;
    out.certificate.method = "linear";
    out.certificate.best_infeasibility = 0.0;
    return out;
  }

  const Index kb = static_cast<Index>(sys.ctx.beta().size());
  std::mt19937_64 rng(opt.seed);
  double infeas = 0.0;

  if (kb <= kMaxSplitBits) {
    if (auto q = common_beta_basis(sys, rng)) {
      out.certificate.method = kb == 0 ? "linear" : "common-basis";
      if (search.try_basis(*q, infeas)) return out;
      // A rejected LP witness means the exhaustive claim cannot be trusted.
      if (std::isfinite(search.best_rejected)) return out;
      out.tag = Verdict::Noncritical;
      out.certificate.exhaustive = true;
      return out;
    }
  }

  if (kb == 2) {
    out.certificate.method = "angle-grid";
    const int m = std::max(opt.grid_points, 2);
    std::vector<double> score(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
      const double th = std::numbers::pi * i / m;
      if (search.try_basis(rotation(th), infeas)) return out;
      score[static_cast<size_t>(i)] = infeas;
    }
    // golden-section refinement around the three least infeasible angles
    std::vector<int> order(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) order[static_cast<size_t>(i)] = i;
    std::partial_sort(order.begin(), order.begin() + std::min(3, m), order.end(),
                      [&](int a, int b) { return score[static_cast<size_t>(a)] < score[static_cast<size_t>(b)]; });
    const double h = std::numbers::pi / m;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int r = 0; r < std::min(3, m); ++r) {
      const double c = std::numbers::pi * order[static_cast<size_t>(r)] / m;
      double lo = c - h, hi = c + h;
      double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
      double f1, f2;
      if (search.try_basis(rotation(x1), f1)) return out;
      if (search.try_basis(rotation(x2), f2)) return out;
      for (int it = 0; it < 24; ++it) {
        if (f1 < f2) {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - g * (hi - lo);
          if (search.try_basis(rotation(x1), f1)) return out;
        } else {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + g * (hi - lo);
          if (search.try_basis(rotation(x2), f2)) return out;
        }
      }
    }
    return out;
  }

  if (kb <= kMaxSplitBits) {
    out.certificate.method = "random-bases";
    if (search.try_basis(Mat::Identity(kb, kb), infeas)) return out;
    // eigenbasis of a random combination of the beta blocks
    {
      std::normal_distribution<double> gdist(0.0, 1.0);
      SymMat comb(kb);
      for (const auto& d : sys.jac_tilde) comb += gdist(rng) * principal(d, sys.ctx.beta());
      if (search.try_basis(jacobi_eigen(comb).first, infeas)) return out;
    }
    for (int s = 0; s < opt.samples; ++s)
      if (search.try_basis(random_orthogonal(kb, rng), infeas)) return out;
  } else {
    out.certificate.method = "skipped";
  }
  return out;
}

XPartResult xpart_condition(const CriticalitySystem& sys) {
  XPartResult out;
  const Index n = sys.n();
  if (n == 0) return out;
  const auto& ctx = sys.ctx;
  std::vector<Vec> rows;
  for (Index r = 0; r < n; ++r) rows.push_back(sys.hessL.row(r).transpose());
  auto m_entry = [&](Index a, Index b) {
    Vec row(n);
    for (Index r = 0; r < n; ++r) row(r) = sys.jac_tilde[static_cast<size_t>(r)](a, b);
    return row;
  };
  for (Index b : ctx.gamma()) {
    for (Index a : ctx.alpha()) rows.push_back(m_entry(a, b));
    for (Index a : ctx.beta()) rows.push_back(m_entry(a, b));
    for (Index a : ctx.gamma())
      if (a <= b) rows.push_back(m_entry(a, b));
  }
  Mat eq(static_cast<Index>(rows.size()), n);
  for (size_t r = 0; r < rows.size(); ++r) eq.row(static_cast<Index>(r)) = rows[r].transpose();
  const Mat l = null_space(eq);
  if (l.cols() == 0) return out;

  auto finish = [&](Vec xi) {
    xi /= xi.norm();
    out.holds = false;
    out.witness = xi;
    return out;
  };
  const auto& beta = ctx.beta();
  if (beta.empty()) return finish(l.col(0));

  // image of the beta block on L
  std::vector<SymMat> images;
  Mat k(SymMat::svec_size(static_cast<Index>(beta.size())), l.cols());
  for (Index j = 0; j < l.cols(); ++j) {
    SymMat mb = principal(jacobian_apply(sys.jac_tilde, l.col(j)), beta);
    k.col(j) = mb.svec();
    images.push_back(mb);
  }
  const Mat kern = null_space(k);
  if (kern.cols() > 0) return finish(l * kern.col(0));
  if (auto s = subspace_nonzero_psd(images, static_cast<Index>(beta.size()))) {
    const Vec c = k.completeOrthogonalDecomposition().solve(s->svec());
    return finish(l * c);
  }
  return out;
}

bool check_rcq(const ProblemData& pd, const Vec& xbar) {
  const SymMat g = eval_G(pd, xbar);
  const auto d = spectral_decompose(g);
  if (!d.gamma.empty()) throw InputError("G(xbar) is not positive semidefinite");
  if (d.beta.empty()) return true;
  std::vector<SymMat> blocks;
  for (const auto& dj : eval_G_jacobian(pd, xbar)) blocks.push_back(principal(d.to_basis(dj), d.beta));
  return subspace_contains_pd(blocks, static_cast<Index>(d.beta.size()));
}

bool check_srcq(const ProblemData& pd, const Vec& xbar, const SymMat& ybar) {
  const auto ctx = ConeContext::from_sum(eval_G(pd, xbar) + ybar);
  const auto& beta = ctx.beta();
  const auto& gamma = ctx.gamma();
  std::vector<std::pair<Index, Index>> coords;
  for (Index b : gamma) {
    for (Index a : beta) coords.emplace_back(a, b);
    for (Index a : gamma)
      if (a <= b) coords.emplace_back(a, b);
  }
  const auto jac = eval_G_jacobian(pd, xbar);
  std::vector<SymMat> jt;
  for (const auto& dj : jac) jt.push_back(ctx.decomp.to_basis(dj));
  const Index nc = static_cast<Index>(coords.size());
  Mat r(nc, pd.n);
  for (Index c = 0; c < nc; ++c)
    for (Index j = 0; j < pd.n; ++j)
      r(c, j) = jt[static_cast<size_t>(j)](coords[static_cast<size_t>(c)].first,
                                           coords[static_cast<size_t>(c)].second);
  if (nc > 0) {
    if (pd.n == 0) return false;
    Eigen::JacobiSVD<Mat> svd(r);
    const Vec& s = svd.singularValues();
    const double cut = 1e-10 * std::max(1.0, s.size() ? s(0) : 0.0);
    Index rank = 0;
    while (rank < s.size() && s(rank) > cut) ++rank;
    if (rank < nc) return false;
  }
  if (beta.empty()) return true;
  const Mat kern = nc > 0 ? null_space(r) : Mat(Mat::Identity(pd.n, pd.n));
  std::vector<SymMat> blocks;
  for (Index c = 0; c < kern.cols(); ++c)
    blocks.push_back(principal(jacobian_apply(jt, kern.col(c)), beta));
  return subspace_contains_pd(blocks, static_cast<Index>(beta.size()));
}

std::optional<NLPSystem> diagonal_reduction(const ProblemData& pd, const KKTPoint& kkt) {
  if (!pd.is_diagonal()) return std::nullopt;
  {
    Mat off = kkt.Y.full();
    off.diagonal().setZero();
    if (off.cwiseAbs().maxCoeff() > 0.0) return std::nullopt;
  }
  NLPSystem nlp;
  const Index n = pd.n, p = pd.p;
  nlp.hessL = lagrangian_hessian(pd, kkt.x, kkt.Y);
  nlp.grads = Mat(p, n);
  const auto jac = eval_G_jacobian(pd, kkt.x);
  for (Index k = 0; k < p; ++k)
    for (Index i = 0; i < n; ++i) nlp.grads(k, i) = jac[static_cast<size_t>(i)](k, k);
  nlp.g = eval_G(pd, kkt.x).full().diagonal();
  nlp.y = kkt.Y.full().diagonal();
  const double tol = default_zero_tol(nlp.g + nlp.y);
  for (Index k = 0; k < p; ++k) {
    if (nlp.g(k) > tol)
      nlp.inactive.push_back(k);
    else if (nlp.y(k) < -tol)
      nlp.minus.push_back(k);
    else
      nlp.zero.push_back(k);
  }
  return nlp;
}

CriticalityVerdict classify_nlp(const NLPSystem& nlp) {
  CriticalityVerdict out;
  out.certificate.method = "branches";
  out.certificate.best_infeasibility = std::numeric_limits<double>::infinity();
  const Index n = nlp.hessL.rows(), p = nlp.grads.rows();
  const Index nv = n + p;
  Mat sel = Mat::Zero(n, nv);
  sel.leftCols(n).setIdentity();
  if (n == 0) {
    out.tag = Verdict::Noncritical;
    out.certificate.exhaustive = true;
    return out;
  }
  // hessL xi + sum_k eta_k grad g_k = 0
  Mat stat(n, nv);
  stat << nlp.hessL, nlp.grads.transpose();
  auto g_row = [&](Index k) {
    Vec r = Vec::Zero(nv);
    r.head(n) = nlp.grads.row(k).transpose();
    return r;
  };
  auto eta_row = [&](Index k) {
    Vec r = Vec::Zero(nv);
    r(n + k) = 1.0;
    return r;
  };
  const Index nz = static_cast<Index>(nlp.zero.size());
  if (nz > kMaxSplitBits) throw InputError("too many biactive constraints for enumeration");
  for (unsigned mask = 0; mask < (1u << nz); ++mask) {
    std::vector<Vec> eqs, ges;
    for (Index k : nlp.inactive) eqs.push_back(eta_row(k));
    for (Index k : nlp.minus) eqs.push_back(g_row(k));
    for (Index j = 0; j < nz; ++j) {
      const Index k = nlp.zero[static_cast<size_t>(j)];
      if (mask & (1u << j)) {
        eqs.push_back(g_row(k));
        ges.push_back(-eta_row(k));
      } else {
        eqs.push_back(eta_row(k));
        ges.push_back(g_row(k));
      }
    }
    Mat eq(n + static_cast<Index>(eqs.size()), nv), ge(static_cast<Index>(ges.size()), nv);
    eq.topRows(n) = stat;
    for (size_t r = 0; r < eqs.size(); ++r) eq.row(n + static_cast<Index>(r)) = eqs[r].transpose();
    for (size_t r = 0; r < ges.size(); ++r) ge.row(static_cast<Index>(r)) = ges[r].transpose();
    ++out.certificate.branches;
    ++out.certificate.lps;
    const auto ds = find_nonzero_direction(eq, ge, sel);
    if (!ds.found) {
      out.certificate.best_infeasibility = std::min(out.certificate.best_infeasibility, ds.infeasibility);
      continue;
    }
    const Vec xi = ds.v.head(n);
    const Vec eta = ds.v.tail(p);
    out.tag = Verdict::Critical;
    out.xi = xi;
    out.residual = (nlp.hessL * xi + nlp.grads.transpose() * eta).norm();
    SymMat e(p);
    for (Index k = 0; k < p; ++k) e.set(k, k, eta(k));
    out.eta = e;
    return out;
  }
  out.tag = Verdict::Noncritical;
  out.certificate.exhaustive = true;
  return out;
}

}  // namespace kkt
