#include "kktspectra/cones.hpp"

#include <algorithm>
#include <cmath>

#include "kktspectra/errors.hpp"

namespace kkt {
namespace {

double psd_defect(const SymMat& m) {
  return m.dim() == 0 ? 0.0 : std::max(0.0, -min_eigenvalue(m));
}

double nsd_defect(const SymMat& m) {
  return m.dim() == 0 ? 0.0 : std::max(0.0, max_eigenvalue(m));
}

void check_dim(const ConeContext& ctx, const SymMat& h) {
  if (h.dim() != ctx.dim()) throw InputError("direction dimension does not match cone context");
}

}  // namespace

ConeContext ConeContext::from_sum(const SymMat& a, double tol_zero) {
  ConeContext ctx;
  ctx.decomp = spectral_decompose(a, tol_zero);
  ctx.X = project_psd(ctx.decomp);
  ctx.Y = a - ctx.X;
  return ctx;
}

ConeContext ConeContext::from_sum(const SymMat& a) {
  ConeContext ctx;
  ctx.decomp = spectral_decompose(a);
  ctx.X = project_psd(ctx.decomp);
  ctx.Y = a - ctx.X;
  return ctx;
}

ConeContext ConeContext::from_pair(const SymMat& x, const SymMat& y, double tol_zero) {
  if (x.dim() != y.dim()) throw InputError("X and Y dimensions differ");
  const double scale = std::max(1.0, std::max(x.norm(), y.norm()));
  if (psd_defect(x) > 1e-8 * scale) throw InputError("X is not positive semidefinite");
  if (nsd_defect(y) > 1e-8 * scale) throw InputError("Y is not negative semidefinite");
  if (std::abs(inner(x, y)) > 1e-8 * std::max(1.0, x.norm() * y.norm()))
    throw InputError("X and Y are not complementary");
  ConeContext ctx;
  ctx.decomp = spectral_decompose(x + y, tol_zero);
  ctx.X = x;
  ctx.Y = y;
  return ctx;
}

ConeContext ConeContext::from_pair(const SymMat& x, const SymMat& y) {
  const SymMat a = x + y;
  return from_pair(x, y, default_zero_tol(jacobi_eigen(a).second));
}

Membership tangent_membership(const ConeContext& ctx, const SymMat& h, double tol) {
  check_dim(ctx, h);
  const SymMat ht = ctx.decomp.to_basis(h);
  const auto bg = concat(ctx.beta(), ctx.gamma());
  const double v = psd_defect(principal(ht, bg));
  return {v <= tol, v};
}

Membership normal_membership(const ConeContext& ctx, const SymMat& h, double tol) {
  check_dim(ctx, h);
  const SymMat ht = ctx.decomp.to_basis(h);
  const auto bg = concat(ctx.beta(), ctx.gamma());
  std::vector<Index> all(static_cast<size_t>(ctx.dim()));
  for (Index i = 0; i < ctx.dim(); ++i) all[static_cast<size_t>(i)] = i;
  const double v = std::max(nsd_defect(principal(ht, bg)),
                            block(ht.full(), ctx.alpha(), all).norm());
  return {v <= tol, v};
}

Membership critical_cone_psd_membership(const ConeContext& ctx, const SymMat& h,
                                        double tol) {
  check_dim(ctx, h);
  const SymMat ht = ctx.decomp.to_basis(h);
  const auto bg = concat(ctx.beta(), ctx.gamma());
  const double v = std::max(block(ht.full(), ctx.gamma(), bg).norm(),
                            psd_defect(principal(ht, ctx.beta())));
  return {v <= tol, v};
}

Membership critical_cone_nsd_membership(const ConeContext& ctx, const SymMat& h,
                                        double tol) {
  check_dim(ctx, h);
  const SymMat ht = ctx.decomp.to_basis(h);
  const auto ab = concat(ctx.alpha(), ctx.beta());
  const double v = std::max(block(ht.full(), ctx.alpha(), ab).norm(),
                            nsd_defect(principal(ht, ctx.beta())));
  return {v <= tol, v};
}

GraphTangentMembership graph_tangent_membership(const ConeContext& ctx,
                                                const SymMat& h1, const SymMat& h2,
                                                double tol) {
  check_dim(ctx, h1);
  check_dim(ctx, h2);
  const auto& a = ctx.alpha();
  const auto& b = ctx.beta();
  const auto& g = ctx.gamma();
  const Mat t1 = ctx.decomp.to_basis(h1).full();
  const Mat t2 = ctx.decomp.to_basis(h2).full();
  const Mat& sigma = ctx.decomp.sigma;

  double v = 0.0;
  v = std::max(v, block(t1, b, g).norm());
  v = std::max(v, block(t1, g, g).norm());
  v = std::max(v, block(t2, a, a).norm());
  v = std::max(v, block(t2, a, b).norm());
  {
    const Mat s = block(sigma, a, g);
    const Mat coupling = (s.array() - 1.0) * block(t1, a, g).array() +
                         s.array() * block(t2, a, g).array();
    v = std::max(v, coupling.norm());
  }
  if (!b.empty()) {
    const SymMat b1 = principal(SymMat::symmetrized(t1), b);
    const SymMat b2 = principal(SymMat::symmetrized(t2), b);
    v = std::max(v, psd_defect(b1));
    v = std::max(v, nsd_defect(b2));
    v = std::max(v, std::abs(inner(b1, b2)) / std::max(1.0, b1.norm() * b2.norm()));
  }

  GraphTangentMembership out;
  out.violation_blocks = v;
  out.member_blocks = v <= tol;
  out.violation_deriv = (h1 - dir_deriv_projection(ctx.decomp, h1 + h2)).norm();
  out.member_deriv = out.violation_deriv <= tol;
  return out;
}

SymMat project_critical_cone(const ConeContext& ctx, const SymMat& z) {
  check_dim(ctx, z);
  SymMat zt = ctx.decomp.to_basis(z);
  const auto bg = concat(ctx.beta(), ctx.gamma());
  for (Index i : ctx.gamma())
    for (Index j : bg) zt.set(i, j, 0.0);
  const auto& b = ctx.beta();
  if (!b.empty()) {
    const SymMat bb = project_psd(principal(zt, b));
    for (size_t i = 0; i < b.size(); ++i)
      for (size_t j = 0; j < b.size(); ++j)
        zt.set(b[i], b[j], bb(static_cast<Index>(i), static_cast<Index>(j)));
  }
  return ctx.decomp.from_basis(zt);
}

SymMat project_critical_cone_polar(const ConeContext& ctx, const SymMat& z) {
  return z - project_critical_cone(ctx, z);
}

bool is_normal_cone_polyhedral(const ConeContext& ctx) {
  return static_cast<Index>(ctx.alpha().size()) >= ctx.dim() - 1;
}

bool strict_complementarity(const ConeContext& ctx) { return ctx.beta().empty(); }

}  // namespace kkt
