#include "kktspectra/problem.hpp"

#include <cmath>

#include "kktspectra/errors.hpp"

namespace kkt {
namespace {

void check_x(const ProblemData& pd, const Vec& x) {
  if (x.size() != pd.n)
    throw InputError("x has length " + std::to_string(x.size()) + ", expected " +
                     std::to_string(pd.n));
}

void check_y(const ProblemData& pd, const SymMat& y) {
  if (y.dim() != pd.p)
    throw InputError("matrix has order " + std::to_string(y.dim()) + ", expected " +
                     std::to_string(pd.p));
}

}  // namespace

ProblemData ProblemData::zeros(Index n, Index p) {
  ProblemData pd;
  pd.n = n;
  pd.p = p;
  pd.f_lin = Vec::Zero(n);
  pd.f_quad = Mat::Zero(n, n);
  pd.g_const = SymMat(p);
  pd.g_lin.assign(static_cast<size_t>(n), SymMat(p));
  pd.g_quad.assign(static_cast<size_t>(n), std::vector<SymMat>(static_cast<size_t>(n), SymMat(p)));
  return pd;
}

void ProblemData::validate() const {
  if (n < 0 || p <= 0) throw InputError("problem needs n >= 0 and p >= 1");
  if (f_lin.size() != n) throw InputError("f.lin length mismatch");
  if (f_quad.rows() != n || f_quad.cols() != n) throw InputError("f.quad shape mismatch");
  if (!f_lin.allFinite() || !f_quad.allFinite()) throw InputError("non-finite objective data");
  if (n > 0 && (f_quad - f_quad.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, f_quad.cwiseAbs().maxCoeff()))
    throw InputError("f.quad is not symmetric");
  if (g_const.dim() != p || !g_const.all_finite()) throw InputError("G.A0 invalid");
  if (static_cast<Index>(g_lin.size()) != n) throw InputError("G.A must have n entries");
  for (const auto& a : g_lin)
    if (a.dim() != p || !a.all_finite()) throw InputError("G.A entry invalid");
  if (static_cast<Index>(g_quad.size()) != n) throw InputError("G.B must be n x n");
  for (Index i = 0; i < n; ++i) {
    const auto& row = g_quad[static_cast<size_t>(i)];
    if (static_cast<Index>(row.size()) != n) throw InputError("G.B must be n x n");
    for (Index j = 0; j < n; ++j) {
      const auto& b = row[static_cast<size_t>(j)];
      if (b.dim() != p || !b.all_finite()) throw InputError("G.B entry invalid");
      if ((b - g_quad[static_cast<size_t>(j)][static_cast<size_t>(i)]).norm() > 0.0)
        throw InputError("G.B must satisfy B_ij = B_ji");
    }
  }
}

bool ProblemData::is_diagonal(double tol) const {
  auto diag = [tol](const SymMat& m) {
    Mat off = m.full();
    off.diagonal().setZero();
    return off.cwiseAbs().maxCoeff() <= tol;
  };
  if (!diag(g_const)) return false;
  for (const auto& a : g_lin)
    if (!diag(a)) return false;
  for (const auto& row : g_quad)
    for (const auto& b : row)
      if (!diag(b)) return false;
  return true;
}

double eval_f(const ProblemData& pd, const Vec& x) {
  check_x(pd, x);
  return pd.f_lin.dot(x) + 0.5 * x.dot(pd.f_quad * x);
}

Vec eval_grad_f(const ProblemData& pd, const Vec& x) {
  check_x(pd, x);
  return pd.f_lin + pd.f_quad * x;
}

Mat eval_hess_f(const ProblemData& pd) { return pd.f_quad; }

SymMat eval_G(const ProblemData& pd, const Vec& x) {
  check_x(pd, x);
  SymMat g = pd.g_const;
  for (Index i = 0; i < pd.n; ++i) {
    g += x(i) * pd.g_lin[static_cast<size_t>(i)];
    for (Index j = 0; j < pd.n; ++j)
      g += (0.5 * x(i) * x(j)) * pd.g_quad[static_cast<size_t>(i)][static_cast<size_t>(j)];
  }
  return g;
}

std::vector<SymMat> eval_G_jacobian(const ProblemData& pd, const Vec& x) {
  check_x(pd, x);
  std::vector<SymMat> d = pd.g_lin;
  for (Index i = 0; i < pd.n; ++i)
    for (Index j = 0; j < pd.n; ++j)
      d[static_cast<size_t>(i)] += x(j) * pd.g_quad[static_cast<size_t>(i)][static_cast<size_t>(j)];
  return d;
}

const std::vector<std::vector<SymMat>>& eval_G_second(const ProblemData& pd) { return pd.g_quad; }

SymMat jacobian_apply(const std::vector<SymMat>& jac, const Vec& d) {
  if (static_cast<Index>(jac.size()) != d.size()) throw InputError("direction length mismatch");
  if (jac.empty()) throw InputError("empty Jacobian");
  SymMat out(jac.front().dim());
  for (size_t i = 0; i < jac.size(); ++i) out += d(static_cast<Index>(i)) * jac[i];
  return out;
}

Vec adjoint_apply(const std::vector<SymMat>& jac, const SymMat& y) {
  Vec out(static_cast<Index>(jac.size()));
  for (size_t i = 0; i < jac.size(); ++i) out(static_cast<Index>(i)) = inner(jac[i], y);
  return out;
}

Vec adjoint_jacobian_apply(const ProblemData& pd, const Vec& x, const SymMat& y) {
  check_y(pd, y);
  return adjoint_apply(eval_G_jacobian(pd, x), y);
}

Mat lagrangian_hessian(const ProblemData& pd, const Vec& x, const SymMat& y) {
  check_x(pd, x);
  check_y(pd, y);
  Mat h = pd.f_quad;
  for (Index i = 0; i < pd.n; ++i)
    for (Index j = 0; j < pd.n; ++j)
      h(i, j) += inner(y, pd.g_quad[static_cast<size_t>(i)][static_cast<size_t>(j)]);
  return 0.5 * (h + h.transpose());
}

Vec lagrangian_gradient(const ProblemData& pd, const Vec& x, const SymMat& y) {
  return eval_grad_f(pd, x) + adjoint_jacobian_apply(pd, x, y);
}

KKTResidual kkt_residual(const ProblemData& pd, const Vec& x, const SymMat& y) {
  const SymMat g = eval_G(pd, x);
  check_y(pd, y);
  KKTResidual r;
  r.r1 = lagrangian_gradient(pd, x, y).norm();
  r.r2 = (g - project_psd(g + y)).norm();
  return r;
}

KKTPoint make_kkt_point(const ProblemData& pd, const Vec& x, const SymMat& y) {
  return KKTPoint{x, y, kkt_residual(pd, x, y)};
}

NormalMapValue robinson_normal_map(const ProblemData& pd, const Vec& x, const SymMat& z) {
  check_y(pd, z);
  const SymMat pz = project_psd(z);
  NormalMapValue v;
  v.psi1 = eval_grad_f(pd, x) + adjoint_jacobian_apply(pd, x, z - pz);
  v.psi2 = eval_G(pd, x) - pz;
  return v;
}

SymMat project_normal_cone(const SymMat& x_psd, const SymMat& y) {
  const auto ctx = ConeContext::from_sum(x_psd);
  SymMat yt = ctx.decomp.to_basis(y);
  for (Index i : ctx.alpha())
    for (Index j = 0; j < yt.dim(); ++j) yt.set(i, j, 0.0);
  const auto bg = concat(ctx.beta(), ctx.gamma());
  if (!bg.empty()) {
    const SymMat nb = project_nsd(principal(yt, bg));
    for (size_t a = 0; a < bg.size(); ++a)
      for (size_t b = 0; b < bg.size(); ++b)
        yt.set(bg[a], bg[b], nb(static_cast<Index>(a), static_cast<Index>(b)));
  }
  return ctx.decomp.from_basis(yt);
}

MultiplierResidual multiplier_set_residual(const ProblemData& pd, const Vec& xbar,
                                           const SymMat& y) {
  check_y(pd, y);
  const auto jac = eval_G_jacobian(pd, xbar);
  const Index s = SymMat::svec_size(pd.p);
  Mat a(pd.n, s);
  for (Index i = 0; i < pd.n; ++i) a.row(i) = jac[static_cast<size_t>(i)].svec().transpose();
  const Vec b = -eval_grad_f(pd, xbar);
  MultiplierResidual out;
  if (pd.n > 0) {
    // Least-norm correction onto the affine solution set of a * svec(Y) = b.
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(a);
    const Vec delta = cod.solve(a * y.svec() - b);
    out.d1 = delta.norm();
  }
  out.d2 = (y - project_normal_cone(eval_G(pd, xbar), y)).norm();
  return out;
}

ProblemData perturbed(const ProblemData& pd, const Vec& p1, const SymMat& p2) {
  check_x(pd, p1);
  check_y(pd, p2);
  ProblemData out = pd;
  out.f_lin -= p1;
  out.g_const += p2;
  return out;
}

SymMat example2_default_a() {
  SymMat a(2);
  a.set(0, 1, 1.0);
  return a;
}

ProblemData example2_problem(double eps, const SymMat& a) {
  if (a.dim() != 2) throw InputError("example2 needs a 2x2 matrix A");
  if (a(0, 1) == 0.0) throw InputError("example2 needs a nondiagonal A");
  ProblemData pd = ProblemData::zeros(2, 2);
  pd.f_lin << 1.0, 0.0;
  pd.f_quad = 2.0 * Mat::Identity(2, 2);
  pd.g_const = eps * a;
  pd.g_lin[0] = SymMat::diagonal({1.0, 0.0});
  pd.g_lin[1] = SymMat::diagonal({0.0, 1.0});
  return pd;
}

Family example2_family(const SymMat& a) {
  Family fam;
  fam.name = "example2";
  fam.base = example2_problem(0.0, a);
  fam.xbar = Vec::Zero(2);
  fam.ybar = SymMat::diagonal({-1.0, 0.0});
  fam.perturbation = [a](double eps) { return std::pair{Vec(Vec::Zero(2)), SymMat(eps * a)}; };
  return fam;
}

namespace {

Vec example3_direction() {
  const double r3 = std::sqrt(3.0);
  Vec c(2);
  c << 5.0 * r3 / 3.0, 4.0 * r3 / 3.0;
  return c;
}

const SymMat& example3_b() {
  static const SymMat b = SymMat::diagonal({2.0, 1.0});
  return b;
}

}  // namespace

ProblemData example3_problem(double t) {
  if (t < 0.0) throw InputError("example3 needs t >= 0");
  ProblemData pd = ProblemData::zeros(2, 2);
  pd.f_quad << 2.0, 1.0, 1.0, 2.0;
  pd.f_lin = -std::sqrt(t) * example3_direction();
  pd.g_const = -t * example3_b();
  pd.g_quad[0][0] = SymMat::diagonal({2.0, 0.0});
  pd.g_quad[0][1] = SymMat::diagonal({1.0, 1.0});
  pd.g_quad[1][0] = SymMat::diagonal({1.0, 1.0});
  pd.g_quad[1][1] = SymMat::diagonal({0.0, 2.0});
  return pd;
}

Family example3_family() {
  Family fam;
  fam.name = "example3";
  fam.base = example3_problem(0.0);
  fam.xbar = Vec::Zero(2);
  fam.ybar = SymMat(2);
  fam.perturbation = [](double t) {
    return std::pair{Vec(std::sqrt(t) * example3_direction()), SymMat(-t * example3_b())};
  };
  return fam;
}

Vec example3_path(double t) {
  const double r3 = std::sqrt(3.0), st = std::sqrt(t);
  Vec x(2);
  x << 2.0 * r3 / 3.0 * st, r3 / 3.0 * st;
  return x;
}

}  // namespace kkt
