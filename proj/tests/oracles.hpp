#pragma once

#include <cmath>
#include <limits>

#include "kktspectra/conic.hpp"
#include "kktspectra/criticality.hpp"
#include "support.hpp"

namespace kkt::testing {

struct WitnessOracle {
  bool critical = false;       // exact branch enumeration found xi != 0
  int sampler_hits = 0;        // random pairs with residual <= 1e-6
  double sampler_min = std::numeric_limits<double>::infinity();
};

/// Decides criticality for |beta| <= 1 without the block formulas: each sign
/// branch of the beta entry makes the derivative of the projection linear,
/// and its matrix is assembled column by column from dir_deriv_projection.
/// A seeded sampler screens random normalized pairs through witness_residual.
inline WitnessOracle witness_oracle(const CriticalitySystem& sys, int samples, std::uint64_t seed) {
  WitnessOracle out;
  const Index n = sys.n(), p = sys.p();
  const Index s = SymMat::svec_size(p);
  const SymMat a = sys.ctx.X + sys.ctx.Y;
  Eigen::SelfAdjointEigenSolver<Mat> es(a.full());
  const double tol = 1e-8 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  std::vector<Index> zero;
  for (Index i = 0; i < p; ++i)
    if (std::abs(es.eigenvalues()(i)) <= tol) zero.push_back(i);
  if (zero.size() > 1) throw std::logic_error("witness oracle needs |beta| <= 1");

  const Index nv = n + s;
  auto unpack = [&](const Vec& w) {
    return std::pair{Vec(w.head(n)), SymMat::from_svec(w.tail(s), p)};
  };
  SymMat e(p);
  double scale = 1.0;
  for (const auto& d : sys.jac) scale = std::max(scale, d.norm());
  const double c = 1e3 * scale;
  if (!zero.empty()) {
    const Vec v = es.eigenvectors().col(zero.front());
    e = SymMat::symmetrized(v * v.transpose());
  }
  const std::vector<double> branches = zero.empty() ? std::vector<double>{0.0} : std::vector<double>{c, -c};
  for (double shift : branches) {
    Mat eq(n + s, nv);
    Mat ge(zero.empty() ? 0 : 1, nv);
    for (Index k = 0; k < nv; ++k) {
      auto [xi, eta] = unpack(Vec::Unit(nv, k));
      const SymMat h1 = jacobian_apply(sys.jac, xi);
      const SymMat h = h1 + eta;
      SymMat lin = dir_deriv_projection(a, h + shift * e);
      if (shift > 0) lin -= shift * e;
      eq.col(k).head(n) = sys.hessL * xi + adjoint_apply(sys.jac, eta);
      eq.col(k).tail(s) = (h1 - lin).svec();
      if (ge.rows()) ge(0, k) = (shift > 0 ? 1.0 : -1.0) * inner(e, h);
    }
    Mat sel = Mat::Zero(n, nv);
    sel.leftCols(n).setIdentity();
    if (find_nonzero_direction(eq, ge, sel).found) out.critical = true;
  }

  Rng rng(seed);
  for (int k = 0; k < samples; ++k) {
    Vec xi = gaussian(n, 1, rng);
    xi /= xi.norm();
    const SymMat eta = random_sym(p, rng);
    const double r = witness_residual(sys, xi, eta);
    out.sampler_min = std::min(out.sampler_min, r);
    if (r <= 1e-6) ++out.sampler_hits;
  }
  return out;
}

/// Diagonal X, Y with one negative direction gamma of Y, at most one zero
/// direction beta, and a direction H in the critical cone whose beta entry is
/// at least 0.5.
struct SigmaInstance {
  ConeContext ctx;
  SymMat h;
  Index gamma = 0;
};

inline SigmaInstance random_sigma_instance(Rng& rng) {
  std::uniform_int_distribution<int> na_pick(1, 3), nb_pick(0, 1);
  std::uniform_real_distribution<double> xpos(1.0, 3.0), yneg(-3.0, -0.5), hent(-1.0, 1.0),
      hbig(0.3, 1.0), hbb(0.5, 2.0);
  const Index na = na_pick(rng), nb = nb_pick(rng);
  const Index p = na + nb + 1;
  Vec x = Vec::Zero(p), y = Vec::Zero(p);
  for (Index i = 0; i < na; ++i) x(i) = xpos(rng);
  const Index g = p - 1;
  y(g) = yneg(rng);
  SymMat h(p);
  for (Index i = 0; i < na; ++i) {
    for (Index j = i; j < na; ++j) h.set(i, j, hent(rng));
    for (Index j = na; j < na + nb; ++j) h.set(i, j, hent(rng));
    h.set(i, g, (std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0) * hbig(rng));
  }
  for (Index j = na; j < na + nb; ++j) h.set(j, j, hbb(rng));
  return {ConeContext::from_pair(SymMat::diagonal(x), SymMat::diagonal(y)), h, g};
}

/// sup <Y, W> over W = w e_g e_g^T subject to
/// lambda_min(X + tH + t^2 W / 2) >= -1e-6 t^2 for t in {1e-2, 1e-3, 1e-4},
/// by bisection on the monotone feasibility of w.
inline double sigma_grid_oracle(const SigmaInstance& in) {
  const Mat x = in.ctx.X.full(), hm = in.h.full();
  const Index p = x.rows();
  auto feasible = [&](double w) {
    for (double t : {1e-2, 1e-3, 1e-4}) {
      Mat m = x + t * hm;
      m(in.gamma, in.gamma) += 0.5 * t * t * w;
      Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
      if (es.eigenvalues()(0) < -1e-6 * t * t) return false;
    }
    return true;
  };
  double hi = 10.0 * (1.0 + hm.squaredNorm());
  double lo = -hi;
  // coarse grid to bracket, then bisection
  const int grid = 200;
  double prev = hi;
  for (int k = grid; k >= 0; --k) {
    const double w = lo + (hi - lo) * k / grid;
    if (!feasible(w)) {
      lo = w;
      hi = prev;
      break;
    }
    prev = w;
  }
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  (void)p;
  return in.ctx.Y(in.gamma, in.gamma) * hi;
}

/// Example-2 solution with A = [[a,b],[b,c]] from the one-dimensional reduced
/// problem: on the active boundary (x1 + eps a)(x2 + eps c) = eps^2 b^2, so
/// x1 is a function of u = x2 + eps c and phi(u) = x1 + x1^2 + x2^2 is convex.
/// Bisection on phi' in log u.
inline Vec example2_reduced_oracle(double eps, const SymMat& a) {
  const double aa = a(0, 0), b2 = a(0, 1) * a(0, 1), c = a(1, 1);
  auto x1_of = [&](double u) { return eps * eps * b2 / u - eps * aa; };
  auto dphi = [&](double u) {
    const double x1 = x1_of(u);
    const double dx1 = -eps * eps * b2 / (u * u);
    return (1.0 + 2.0 * x1) * dx1 + 2.0 * (u - eps * c);
  };
  double lo = std::log(1e-300), hi = std::log(10.0);
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    (dphi(std::exp(mid)) < 0.0 ? lo : hi) = mid;
  }
  const double u = std::exp(0.5 * (lo + hi));
  Vec x(2);
  x << x1_of(u), u - eps * c;
  return x;
}

}  // namespace kkt::testing
