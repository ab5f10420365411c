#include "kktspectra/sosc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "kktspectra/conic.hpp"
#include "kktspectra/errors.hpp"

namespace kkt {
namespace {

// tol_zero < 0 picks the default partition tolerance.
ConeContext context_at(const ProblemData& pd, const Vec& xbar, const SymMat& ybar,
                       double tol_zero = -1.0) {
  const SymMat a = eval_G(pd, xbar) + ybar;
  return tol_zero < 0.0 ? ConeContext::from_sum(a) : ConeContext::from_sum(a, tol_zero);
}

Mat second_order_matrix_at(const ConeContext& ctx, const ProblemData& pd, const Vec& xbar,
                           const SymMat& ybar) {
  const auto jac = eval_G_jacobian(pd, xbar);
  const Mat xp = pseudoinverse(ctx.X, ctx.decomp.tol_zero).full();
  Mat q = lagrangian_hessian(pd, xbar, ybar);
  const Mat& y = ybar.full();
  for (Index i = 0; i < pd.n; ++i)
    for (Index j = 0; j < pd.n; ++j) {
      const Mat t = jac[static_cast<size_t>(i)].full() * xp * jac[static_cast<size_t>(j)].full();
      q(i, j) -= y.cwiseProduct(t + t.transpose()).sum();
    }
  return 0.5 * (q + q.transpose());
}

/// Rows (over d) of the linear part of G'(xbar) d in C_{S+}: the gamma x
/// (beta u gamma) entries in the eigenbasis vanish.
Mat critical_equalities(const ConeContext& ctx, const std::vector<SymMat>& jt, Index n) {
  std::vector<std::pair<Index, Index>> coords;
  for (Index b : ctx.gamma()) {
    for (Index a : ctx.beta()) coords.emplace_back(a, b);
    for (Index a : ctx.gamma())
      if (a <= b) coords.emplace_back(a, b);
  }
  Mat rows(static_cast<Index>(coords.size()), n);
  for (size_t r = 0; r < coords.size(); ++r)
    for (Index i = 0; i < n; ++i)
      rows(static_cast<Index>(r), i) = jt[static_cast<size_t>(i)](coords[r].first, coords[r].second);
  return rows;
}

double radical_inverse(unsigned long k, unsigned base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (k > 0) {
    r += f * static_cast<double>(k % base);
    k /= base;
    f *= inv;
  }
  return r;
}

/// Point k of a Halton-based sequence on the unit sphere in R^m.
Vec sphere_point(unsigned long k, Index m) {
  static const unsigned primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53,
                                    59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113};
  Vec v(m);
  for (Index i = 0; i < m; i += 2) {
    const unsigned b1 = primes[static_cast<size_t>(i) % 30];
    const unsigned b2 = primes[static_cast<size_t>(i + 1) % 30];
    const double u1 = std::max(radical_inverse(k + 1, b1), 1e-12);
    const double u2 = radical_inverse(k + 1, b2);
    const double r = std::sqrt(-2.0 * std::log(u1));
    v(i) = r * std::cos(2.0 * M_PI * u2);
    if (i + 1 < m) v(i + 1) = r * std::sin(2.0 * M_PI * u2);
  }
  const double nv = v.norm();
  if (nv < 1e-12) return Vec::Unit(m, 0);
  return v / nv;
}

/// Minimization of c' Qr c over the unit sphere intersected with
/// {c : sum_j c_j B_j >= 0} for the beta blocks B_j.
struct ConeSearch {
  Mat qr;
  std::vector<SymMat> blocks;
  Index kb = 0;
  std::optional<Vec> interior;  // c with sum c_j B_j positive definite

  SymMat image(const Vec& c) const {
    SymMat m(kb);
    for (size_t j = 0; j < blocks.size(); ++j) m += c(static_cast<Index>(j)) * blocks[j];
    return m;
  }

  double violation(const Vec& c) const { return std::max(0.0, -min_eigenvalue(image(c))); }

  double penalty(const Vec& c, double mu, Vec* grad) const {
    const SymMat neg = project_nsd(image(c));
    const double val = c.dot(qr * c) + mu * neg.norm() * neg.norm();
    if (grad) {
      *grad = 2.0 * qr * c;
      for (size_t j = 0; j < blocks.size(); ++j)
        (*grad)(static_cast<Index>(j)) += 2.0 * mu * inner(neg, blocks[j]);
    }
    return val;
  }

  /// Pushes c along the interior direction until it enters the cone.
  Vec repair(const Vec& c) const {
    if (!interior || violation(c) == 0.0) return c;
    double lo = 0.0, hi = 1.0;
    while (violation(c + hi * *interior) > 0.0 && hi < 1e8) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (violation(c + mid * *interior) > 0.0 ? lo : hi) = mid;
    }
    Vec out = c + hi * *interior;
    return out / out.norm();
  }
};

}  // namespace

double sigma_term(const ConeContext& ctx, const SymMat& h) {
  const auto m = critical_cone_psd_membership(ctx, h);
  if (!m.member) {
    std::ostringstream os;
    os << "direction is outside the critical cone (violation " << m.violation << ")";
    throw InputError(os.str());
  }
  const SymMat xp = pseudoinverse(ctx.X, ctx.decomp.tol_zero);
  return 2.0 * (ctx.Y.full().cwiseProduct(h.full() * xp.full() * h.full())).sum();
}

Membership critical_cone_x_membership(const ProblemData& pd, const Vec& xbar, const SymMat& ybar,
                                      const Vec& d) {
  const auto ctx = context_at(pd, xbar, ybar);
  return critical_cone_psd_membership(ctx, jacobian_apply(eval_G_jacobian(pd, xbar), d));
}

Mat second_order_matrix(const ProblemData& pd, const Vec& xbar, const SymMat& ybar) {
  return second_order_matrix_at(context_at(pd, xbar, ybar), pd, xbar, ybar);
}

double evaluate_second_order_form(const ProblemData& pd, const Vec& xbar, const SymMat& ybar,
                                  const Vec& d) {
  const auto ctx = context_at(pd, xbar, ybar);
  const SymMat h = jacobian_apply(eval_G_jacobian(pd, xbar), d);
  const double s = sigma_term(ctx, h);
  return d.dot(lagrangian_hessian(pd, xbar, ybar) * d) - s;
}

const char* to_string(SoscVerdict v) {
  switch (v) {
    case SoscVerdict::Holds: return "SOSCy_holds";
    case SoscVerdict::Fails: return "SOSCy_fails";
    case SoscVerdict::Undetermined: return "Undetermined";
  }
  return "?";
}

const char* to_string(CondVerdict v) {
  switch (v) {
    case CondVerdict::Holds: return "holds";
    case CondVerdict::Fails: return "fails";
    case CondVerdict::Undetermined: return "undetermined";
  }
  return "?";
}

SecondOrderReport check_soscy(const ProblemData& pd, const KKTPoint& kkt, const SoscOptions& opt) {
  const auto res = kkt_residual(pd, kkt.x, kkt.Y);
  if (res.max() > opt.tol_feas) throw InputError("not a certified KKT point");
  SecondOrderReport out;
  const auto ctx = context_at(pd, kkt.x, kkt.Y, opt.tol_zero);
  std::vector<SymMat> jt;
  for (const auto& d : eval_G_jacobian(pd, kkt.x)) jt.push_back(ctx.decomp.to_basis(d));
  const Mat q = second_order_matrix_at(ctx, pd, kkt.x, kkt.Y);
  const Mat eq = critical_equalities(ctx, jt, pd.n);
  const Mat ns = eq.rows() ? null_space(eq) : Mat(Mat::Identity(pd.n, pd.n));
  out.cone_dim = static_cast<int>(ns.cols());

  auto finish = [&](double value, const Vec& d, bool exact) {
    out.min_value = value;
    out.minimizer = d;
    out.exact = exact;
    out.verdict = value > opt.tol_pos ? SoscVerdict::Holds : SoscVerdict::Fails;
    out.sonc_holds = value >= -1e-8;
    return out;
  };
  if (ns.cols() == 0) {
    return finish(std::numeric_limits<double>::infinity(), Vec::Zero(pd.n), true);
  }

  ConeSearch cs;
  cs.qr = ns.transpose() * q * ns;
  cs.qr = 0.5 * (cs.qr + cs.qr.transpose());
  const auto& beta = ctx.beta();
  cs.kb = static_cast<Index>(beta.size());
  for (Index j = 0; j < ns.cols(); ++j) cs.blocks.push_back(principal(jacobian_apply(jt, ns.col(j)), beta));

  const auto [vecs, vals] = jacobi_eigen(SymMat::symmetrized(cs.qr));
  const double lmin = vals(vals.size() - 1);
  const Vec vmin = vecs.col(vecs.cols() - 1);
  if (cs.kb == 0) return finish(lmin, ns * vmin, true);
  // The form is even, so a one-sided constraint never cuts off the minimum.
  if (cs.kb == 1) {
    const Vec v = cs.image(vmin)(0, 0) >= 0.0 ? vmin : Vec(-vmin);
    return finish(lmin, ns * v, true);
  }
  if (lmin > opt.tol_pos) return finish(lmin, ns * vmin, true);
  for (const Vec& v : {vmin, Vec(-vmin)})
    if (cs.violation(v) <= kConeTol) return finish(lmin, ns * v, true);

  {
    const auto ob = orthonormalize(cs.blocks);
    if (!ob.empty()) {
      const auto b = maximize_min_eigenvalue(ob, false, 1e-9);
      if (b.lower > 1e-9) {
        Mat bm(SymMat::svec_size(cs.kb), static_cast<Index>(cs.blocks.size()));
        for (size_t j = 0; j < cs.blocks.size(); ++j) bm.col(static_cast<Index>(j)) = cs.blocks[j].svec();
        Vec c0 = bm.completeOrthogonalDecomposition().solve(b.element.svec());
        if (min_eigenvalue(cs.image(c0)) > 0.0) cs.interior = c0 / c0.norm();
      }
    }
  }

  const Index m = ns.cols();
  double best = std::numeric_limits<double>::infinity();
  Vec best_c;
  std::mt19937_64 rng(opt.seed);
  const unsigned long offset = std::uniform_int_distribution<unsigned long>(0, 1000)(rng);
  const double mus[] = {10.0, 1e3, 1e5};
  for (int s = 0; s < opt.starts; ++s) {
    ++out.starts;
    Vec c = sphere_point(offset + static_cast<unsigned long>(s), m);
    for (int stage = 0; stage < 3; ++stage) {
      const double mu = mus[stage];
      for (int it = 0; it < opt.iterations / 3; ++it) {
        ++out.iterations;
        Vec g;
        const double f = cs.penalty(c, mu, &g);
        g -= g.dot(c) * c;
        if (g.norm() < 1e-12) break;
        double t = opt.step;
        bool moved = false;
        for (int h = 0; h < 40; ++h, t *= 0.5) {
          Vec cn = c - t * g;
          cn /= cn.norm();
          if (cs.penalty(cn, mu, nullptr) <= f - 1e-4 * t * g.squaredNorm()) {
            c = cn;
            moved = true;
            break;
          }
        }
        if (!moved) break;
      }
    }
    const Vec r = cs.repair(c);
    if (cs.violation(r) > kConeTol) continue;
    const double val = r.dot(cs.qr * r);
    if (val < best) {
      best = val;
      best_c = r;
    }
  }
  if (!std::isfinite(best)) {
    out.verdict = SoscVerdict::Undetermined;
    out.min_value = lmin;
    out.minimizer = ns * vmin;
    out.sonc_holds = lmin >= -1e-8;
    return out;
  }
  return finish(best, ns * best_c, false);
}

CriticalProjectionCheck critical_projection_check(const SymMat& c, const SymMat& da, const SymMat& db, double tol) {
  CriticalProjectionCheck out;
  const auto d = spectral_decompose(c);
  out.lhs = (da - dir_deriv_projection(d, da + db)).norm() <= tol;

  const auto ctx = ConeContext::from_sum(c);
  const bool in_cone = critical_cone_psd_membership(ctx, da, tol).member;
  // Half the gradient of the support-function term 2<B, dA A^+ dA>.
  const Mat ap = pseudoinverse(ctx.X, d.tol_zero).full();
  const SymMat half_grad =
      SymMat::symmetrized(ctx.Y.full() * da.full() * ap + ap * da.full() * ctx.Y.full());
  const SymMat w = db + half_grad;
  // w lies in the polar cone iff its projection onto the cone vanishes.
  const bool in_polar = project_critical_cone(ctx, w).norm() <= tol;
  const double sigma = 2.0 * ctx.Y.full().cwiseProduct(da.full() * ap * da.full()).sum();
  const bool balance = std::abs(inner(da, db) + sigma) <= tol;
  out.rhs = in_cone && in_polar && balance;
  return out;
}

ClosednessReport closedness_conditions(const ProblemData& pd, const KKTPoint& kkt,
                                   const ClosednessOptions& opt) {
  const auto res = kkt_residual(pd, kkt.x, kkt.Y);
  if (res.max() > opt.tol_feas) throw InputError("not a certified KKT point");
  ClosednessReport out;
  const auto ctx = context_at(pd, kkt.x, kkt.Y, opt.tol_zero);
  const auto jac = eval_G_jacobian(pd, kkt.x);
  std::vector<SymMat> jt;
  for (const auto& d : jac) jt.push_back(ctx.decomp.to_basis(d));
  const Index n = pd.n, p = pd.p;
  const auto& alpha = ctx.alpha();
  const auto& beta = ctx.beta();
  const Index kb = static_cast<Index>(beta.size());

  // (i) closedness of the image of K = C deg under G'*.
  double jnorm = 0.0;
  for (const auto& d : jac) jnorm = std::max(jnorm, d.norm());
  if (jnorm == 0.0) {
    out.cond_i = CondVerdict::Holds;
    out.cond_i_evidence = "G'(xbar) = 0, image is {0}";
  } else if (kb <= 1) {
    out.cond_i = CondVerdict::Holds;
    out.cond_i_evidence = "polar cone is polyhedral (|beta| <= 1)";
  } else {
    // Closed when ker G'* meets K only inside its lineality space, i.e. when
    // the beta blocks of directions with vanishing gamma rows contain a PD matrix.
    const Mat eq = critical_equalities(ctx, jt, n);
    const Mat kern = eq.rows() ? null_space(eq) : Mat(Mat::Identity(n, n));
    std::vector<SymMat> blocks;
    for (Index c = 0; c < kern.cols(); ++c) blocks.push_back(principal(jacobian_apply(jt, kern.col(c)), beta));
    if (!blocks.empty() && subspace_contains_pd(blocks, kb)) {
      out.cond_i = CondVerdict::Holds;
      out.cond_i_evidence = "kernel of G'* meets K only in its lineality space";
    } else {
      out.cond_i = CondVerdict::Undetermined;
      out.cond_i_evidence = "no exact closedness test applies";
    }
  }

  // (ii) sample Xi intersected with the product of critical cones.
  // Variables: (xi, eta~ upper triangle in the eigenbasis).
  const Index s = SymMat::svec_size(p);
  Mat pos(p, p);
  {
    Index k = 0;
    for (Index a = 0; a < p; ++a)
      for (Index b = a; b < p; ++b) {
        pos(a, b) = pos(b, a) = static_cast<double>(n + k);
        ++k;
      }
  }
  auto var = [&](Index a, Index b) { return static_cast<Index>(pos(a, b)); };
  std::vector<Vec> rows;
  const Mat hess = lagrangian_hessian(pd, kkt.x, kkt.Y);
  for (Index r = 0; r < n; ++r) {
    Vec row = Vec::Zero(n + s);
    row.head(n) = hess.row(r).transpose();
    for (Index a = 0; a < p; ++a)
      for (Index b = a; b < p; ++b) row(var(a, b)) += (a == b ? 1.0 : 2.0) * jt[static_cast<size_t>(r)](a, b);
    rows.push_back(row);
  }
  const Mat ceq = critical_equalities(ctx, jt, n);
  for (Index r = 0; r < ceq.rows(); ++r) {
    Vec row = Vec::Zero(n + s);
    row.head(n) = ceq.row(r).transpose();
    rows.push_back(row);
  }
  for (Index a : alpha) {
    for (Index b : alpha)
      if (a <= b) rows.push_back(Vec::Unit(n + s, var(a, b)));
    for (Index b : beta) rows.push_back(Vec::Unit(n + s, var(a, b)));
  }
  Mat eq(static_cast<Index>(rows.size()), n + s);
  for (size_t r = 0; r < rows.size(); ++r) eq.row(static_cast<Index>(r)) = rows[r].transpose();
  const Mat basis = null_space(eq);
  if (basis.cols() == 0) {
    out.cond_ii = CondVerdict::Holds;
    return out;
  }
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < opt.samples; ++k) {
    Vec c(basis.cols());
    for (Index i = 0; i < c.size(); ++i) c(i) = g(rng);
    Vec z = basis * c;
    z /= z.norm();
    const Vec xi = z.head(n);
    SymMat et(p);
    for (Index a = 0; a < p; ++a)
      for (Index b = a; b < p; ++b) et.set(a, b, z(var(a, b)));
    const SymMat eta = ctx.decomp.from_basis(et);
    const SymMat h = n ? jacobian_apply(jac, xi) : SymMat(p);
    if (!critical_cone_psd_membership(ctx, h).member || !critical_cone_nsd_membership(ctx, eta).member) {
      ++out.rejected;
      continue;
    }
    ++out.accepted;
    worst = std::max(worst, std::abs(inner(project_critical_cone_polar(ctx, h),
                                           project_critical_cone_polar(ctx, eta))));
  }
  out.cond_ii_max_violation = worst;
  if (out.accepted == 0)
    out.cond_ii = CondVerdict::Undetermined;
  else
    out.cond_ii = worst <= 1e-7 ? CondVerdict::Holds : CondVerdict::Fails;
  return out;
}

std::vector<MultiplierRatio> multiplier_distance_estimate(const ProblemData& pd, const Vec& xbar,
                                                          const std::vector<MultiplierSample>& samples) {
  std::vector<MultiplierRatio> out;
  for (const auto& s : samples) {
    MultiplierRatio r;
    r.param = s.param;
    const auto d = multiplier_set_residual(pd, xbar, s.y);
    r.distance = d.d1 + d.d2;
    r.pnorm = s.p1.norm() + s.p2.norm();
    r.ratio = r.pnorm > 0.0 ? r.distance / r.pnorm : 0.0;
    out.push_back(r);
  }
  return out;
}

}  // namespace kkt
