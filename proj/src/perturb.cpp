#include "kktspectra/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "kktspectra/cones.hpp"
#include "kktspectra/errors.hpp"

namespace kkt {
namespace {

// Clarke element of Pi_+ at z: H -> P (Omega o P^T H P) P^T. Eigenvalues
// within a few ulps of zero are grouped with the positive ones, so the
// degenerate block is linearized by the identity.
struct ProjectionJacobian {
  Mat P;
  Mat omega;

  explicit ProjectionJacobian(const SymMat& z) {
    auto [vecs, lam] = jacobi_eigen(z);
    P = std::move(vecs);
    const Index p = lam.size();
    const double tiny = 1e-14 * std::max(1.0, p ? lam.cwiseAbs().maxCoeff() : 0.0);
    omega = Mat::Zero(p, p);
    for (Index i = 0; i < p; ++i) {
      for (Index j = 0; j < p; ++j) {
        const bool pi = lam(i) >= -tiny, pj = lam(j) >= -tiny;
        if (pi && pj) {
          omega(i, j) = 1.0;
        } else if (pi != pj) {
          const double lp = pi ? lam(i) : lam(j);
          const double ln = pi ? lam(j) : lam(i);
          omega(i, j) = std::max(lp, 0.0) / (lp - ln);
        }
      }
    }
  }

  SymMat apply(const SymMat& h) const {
    const Mat t = P.transpose() * h.full() * P;
    return SymMat::symmetrized(P * omega.cwiseProduct(t) * P.transpose());
  }
};

struct Unknowns {
  Index n, p;
  Index size() const { return n + SymMat::svec_size(p); }
  Vec pack(const Vec& x, const SymMat& z) const {
    Vec u(size());
    u << x, z.svec();
    return u;
  }
  Vec x(const Vec& u) const { return u.head(n); }
  SymMat z(const Vec& u) const { return SymMat::from_svec(u.tail(SymMat::svec_size(p)), p); }
};

class NormalMapSystem {
 public:
  NormalMapSystem(const ProblemData& pd, const Vec& p1, const SymMat& p2)
      : pd_(pd), p1_(p1), p2_(p2), un_{pd.n, pd.p} {}

  const Unknowns& unknowns() const { return un_; }

  Vec value(const Vec& u) const {
    const NormalMapValue psi = robinson_normal_map(pd_, un_.x(u), un_.z(u));
    Vec f(un_.size());
    f << psi.psi1 - p1_, (psi.psi2 + p2_).svec();
    return f;
  }

  Mat jacobian(const Vec& u) const {
    const Vec x = un_.x(u);
    const SymMat z = un_.z(u);
    const Index n = un_.n, m = SymMat::svec_size(un_.p);
    const ProjectionJacobian dpi(z);
    const SymMat y = z - project_psd(z);
    const auto jac = eval_G_jacobian(pd_, x);

    Mat j = Mat::Zero(n + m, n + m);
    j.topLeftCorner(n, n) = lagrangian_hessian(pd_, x, y);
    for (Index i = 0; i < n; ++i) j.block(n, i, m, 1) = jac[static_cast<size_t>(i)].svec();
    for (Index k = 0; k < m; ++k) {
      const SymMat e = SymMat::from_svec(Vec::Unit(m, k), un_.p);
      const SymMat de = dpi.apply(e);
      j.block(0, n + k, n, 1) = adjoint_apply(jac, e - de);
      j.block(n, n + k, m, 1) = -de.svec();
    }
    return j;
  }

  Mat fd_jacobian(const Vec& u, const Vec& fu, double step) const {
    Mat j(un_.size(), un_.size());
    for (Index k = 0; k < u.size(); ++k) {
      Vec v = u;
      const double h = step * std::max(1.0, std::abs(u(k)));
      v(k) += h;
      j.col(k) = (value(v) - fu) / h;
    }
    return j;
  }

 private:
  const ProblemData& pd_;
  const Vec& p1_;
  const SymMat& p2_;
  Unknowns un_;
};

Vec solve_linear(const Mat& j, const Vec& rhs) {
  Eigen::ColPivHouseholderQR<Mat> qr(j);
  if (qr.isInvertible()) return qr.solve(rhs);
  return j.completeOrthogonalDecomposition().solve(rhs);
}

PerturbationSample make_sample(const NormalMapSystem& sys, const Vec& u, double res,
                               const Vec& p1, const SymMat& p2) {
  PerturbationSample s;
  s.p1 = p1;
  s.p2 = p2;
  s.x = sys.unknowns().x(u);
  s.z = sys.unknowns().z(u);
  s.Y = s.z - project_psd(s.z);
  s.residual = res;
  return s;
}

double norm_or_zero(const SymMat& m) { return m.dim() ? m.norm() : 0.0; }

}  // namespace

double residual_target(const Vec& p1, const SymMat& p2, const SolveOptions& opt) {
  return opt.tol * (1.0 + p1.norm() + norm_or_zero(p2));
}

PerturbationSample solve_perturbed_kkt(const ProblemData& pd, const Vec& p1, const SymMat& p2,
                                       const Vec& x0, const SymMat& z0, const SolveOptions& opt) {
  pd.validate();
  if (p1.size() != pd.n || p2.dim() != pd.p || x0.size() != pd.n || z0.dim() != pd.p) {
    throw InputError("perturbation or start has the wrong shape");
  }
  if (!p1.allFinite() || !p2.all_finite() || !x0.allFinite() || !z0.all_finite()) {
    throw InputError("perturbation or start is not finite");
  }
  const NormalMapSystem sys(pd, p1, p2);
  const double target = residual_target(p1, p2, opt);

  Vec u = sys.unknowns().pack(x0, z0);
  Vec f = sys.value(u);
  double res = f.norm();
  Vec best_u = u;
  double best = res;
  int newton = 0, lm = 0;

  auto finish = [&]() {
    PerturbationSample s = make_sample(sys, best_u, best, p1, p2);
    s.newton_iters = newton;
    s.lm_iters = lm;
    return s;
  };
  auto record = [&]() {
    if (res < best) {
      best = res;
      best_u = u;
    }
  };
  if (res <= target) return finish();

  // Two rounds: Newton, then LM from the best point, then Newton again to
  // restore the fast local rate.
  for (int round = 0; round < 2; ++round) {
    int failed = 0;
    for (int it = 0; it < opt.max_newton && failed < opt.failed_steps_before_lm; ++it) {
      const Vec d = solve_linear(sys.jacobian(u), -f);
      ++newton;
      if (!d.allFinite()) {
        ++failed;
        continue;
      }
      double t = 1.0;
      bool accepted = false;
      Vec trial_u, trial_f;
      double trial_res = res;
      for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
        trial_u = u + t * d;
        trial_f = sys.value(trial_u);
        trial_res = trial_f.norm();
        if (trial_res * trial_res <= (1.0 - 1e-4 * t) * res * res) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        ++failed;
        continue;
      }
      if (t < 1.0 / 16.0) ++failed;
      else failed = 0;
      u = trial_u;
      f = trial_f;
      res = trial_res;
      record();
      if (res <= target) {
        // A couple of polishing steps while they keep paying off.
        for (int k = 0; k < 2; ++k) {
          const Vec dd = solve_linear(sys.jacobian(u), -f);
          const Vec pu = u + dd;
          const Vec pf = sys.value(pu);
          if (!(pf.norm() < 0.5 * res)) break;
          ++newton;
          u = pu;
          f = pf;
          res = pf.norm();
          record();
        }
        return finish();
      }
    }
    if (round == 1) break;

    // Levenberg-Marquardt on 1/2 ||F||^2 with a forward-difference Jacobian.
    u = best_u;
    f = sys.value(u);
    res = f.norm();
    Mat j = sys.fd_jacobian(u, f, opt.fd_step);
    double mu = 1e-4 * std::max(1.0, (j.transpose() * j).diagonal().maxCoeff());
    const Index dim = u.size();
    while (lm < opt.max_lm && mu < 1e20) {
      ++lm;
      const Mat jtj = j.transpose() * j;
      const Vec g = j.transpose() * f;
      const Vec d = (jtj + mu * Mat::Identity(dim, dim)).ldlt().solve(-g);
      const Vec trial_u = u + d;
      const Vec trial_f = sys.value(trial_u);
      if (d.allFinite() && trial_f.norm() < res) {
        u = trial_u;
        f = trial_f;
        res = f.norm();
        record();
        if (res <= target) return finish();
        mu = std::max(mu / 10.0, 1e-14);
        j = sys.fd_jacobian(u, f, opt.fd_step);
        if (res < 1e-3) break;  // close enough for Newton to take over
      } else {
        mu *= 10.0;
      }
    }
    u = best_u;
    f = sys.value(u);
    res = f.norm();
  }
  throw ConvergenceError("semismooth Newton and Levenberg-Marquardt both stalled", best);
}

OrderFit fit_order_exponent(const std::vector<std::pair<double, double>>& pairs) {
  std::vector<double> lx, ly;
  for (const auto& [s, d] : pairs) {
    if (s > 0.0 && d > 0.0 && std::isfinite(s) && std::isfinite(d)) {
      lx.push_back(std::log(s));
      ly.push_back(std::log(d));
    }
  }
  const size_t m = lx.size();
  if (m < 2) throw InputError("order fit needs at least two positive pairs");
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < m; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < m; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx <= 0.0) throw InputError("order fit needs distinct parameters");
  OrderFit fit;
  fit.exponent = sxy / sxx;
  fit.points = static_cast<int>(m);
  if (m > 2) {
    double ssr = 0.0;
    for (size_t i = 0; i < m; ++i) {
      const double r = ly[i] - my - fit.exponent * (lx[i] - mx);
      ssr += r * r;
    }
    fit.stderr_ = std::sqrt(ssr / static_cast<double>(m - 2) / sxx);
  }
  return fit;
}

const char* to_string(BoundVerdict v) {
  switch (v) {
    case BoundVerdict::Bounded: return "bounded";
    case BoundVerdict::Diverging: return "diverging";
    case BoundVerdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

TrendStats ratio_verdict(const std::vector<std::pair<double, std::optional<double>>>& ratios) {
  auto sorted = ratios;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  if (sorted.size() > static_cast<size_t>(kVerdictWindow)) sorted.resize(kVerdictWindow);
  TrendStats st;
  st.window = static_cast<int>(sorted.size());
  if (sorted.size() < 2) return st;
  std::vector<double> r;
  for (const auto& [s, v] : sorted) {
    if (!v || !std::isfinite(*v) || s <= 0.0) return st;
    r.push_back(*v);
  }
  const double lo = *std::min_element(r.begin(), r.end());
  const double hi = *std::max_element(r.begin(), r.end());
  if (hi == 0.0) {
    st.max_over_min = 1.0;
    st.growth_per_decade = 1.0;
    st.verdict = BoundVerdict::Bounded;
    return st;
  }
  if (lo <= 0.0) return st;
  st.max_over_min = hi / lo;
  std::vector<std::pair<double, double>> pairs;
  for (size_t i = 0; i < r.size(); ++i) pairs.emplace_back(sorted[i].first, r[i]);
  st.growth_per_decade = std::pow(10.0, -fit_order_exponent(pairs).exponent);
  // sorted runs from the smallest parameter up, so increasing as the
  // parameter shrinks means nonincreasing along the vector.
  st.monotone_increasing = true;
  for (size_t i = 1; i < r.size(); ++i) {
    if (r[i - 1] < r[i] * (1.0 - 1e-9)) st.monotone_increasing = false;
  }
  if (st.max_over_min <= 3.0 && st.growth_per_decade <= 1.5) {
    st.verdict = BoundVerdict::Bounded;
  } else if (st.monotone_increasing && st.growth_per_decade >= 2.0) {
    st.verdict = BoundVerdict::Diverging;
  }
  return st;
}

std::vector<double> geometric_schedule(double start, double end, int count) {
  if (count < 1 || !(start > 0.0) || !(end > 0.0) || !std::isfinite(start) || !std::isfinite(end)) {
    throw InputError("geometric schedule needs positive endpoints and count >= 1");
  }
  std::vector<double> out;
  if (count == 1) return {start};
  const double ls = std::log(start), le = std::log(end);
  for (int i = 0; i < count; ++i) {
    out.push_back(std::exp(ls + (le - ls) * i / (count - 1)));
  }
  out.front() = start;
  out.back() = end;
  return out;
}

ErrorBoundReport error_bound_experiment(const Family& family, const std::vector<double>& schedule,
                                        const ExperimentOptions& opt) {
  const ProblemData& pd = family.base;
  pd.validate();
  if (family.xbar.size() != pd.n || family.ybar.dim() != pd.p) {
    throw InputError("reference point has the wrong shape");
  }
  ErrorBoundReport rep;
  rep.family = family.name;
  rep.schedule = schedule;

  const SymMat zbar = eval_G(pd, family.xbar) + family.ybar;
  Vec prev_x = family.xbar;
  SymMat prev_z = zbar;
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> gauss;

  for (const double param : schedule) {
    const auto [p1, p2] = family.perturbation(param);
    const Vec& x0 = opt.continuation ? prev_x : family.xbar;
    const SymMat& z0 = opt.continuation ? prev_z : zbar;
    const double target = residual_target(p1, p2, opt.solve);
    const ProblemData shifted = perturbed(pd, p1, p2);

    std::vector<PerturbationSample> roots;
    auto attempt = [&](const Vec& xs, const SymMat& zs) {
      try {
        PerturbationSample s = solve_perturbed_kkt(pd, p1, p2, xs, zs, opt.solve);
        const double kkt = kkt_residual(shifted, s.x, s.Y).max();
        if (s.residual <= target && kkt <= 10.0 * target) roots.push_back(std::move(s));
      } catch (const ConvergenceError&) {
      }
    };
    attempt(x0, z0);
    const double sx = opt.jitter_scale * (1.0 + x0.norm());
    const double sz = opt.jitter_scale * (1.0 + norm_or_zero(z0));
    for (int k = 0; k < opt.jitter_starts; ++k) {
      Vec xs = x0;
      for (Index i = 0; i < xs.size(); ++i) xs(i) += sx * gauss(rng);
      Mat dz(pd.p, pd.p);
      for (Index i = 0; i < pd.p; ++i)
        for (Index j = 0; j < pd.p; ++j) dz(i, j) = gauss(rng);
      attempt(xs, z0 + sz * SymMat::symmetrized(dz));
    }
    if (roots.empty()) {
      ++rep.excluded;
      continue;
    }

    size_t pick = 0;
    for (size_t i = 1; i < roots.size(); ++i) {
      if ((roots[i].x - family.xbar).norm() < (roots[pick].x - family.xbar).norm()) pick = i;
    }
    SweepPoint pt;
    pt.param = param;
    pt.sample = roots[pick];
    std::vector<const Vec*> distinct;
    for (const auto& r : roots) {
      if (std::none_of(distinct.begin(), distinct.end(),
                       [&](const Vec* v) { return (*v - r.x).norm() <= 1e-6; })) {
        distinct.push_back(&r.x);
      }
      if ((r.x - pt.sample.x).norm() > 1e-6) pt.multiple = true;
    }
    pt.roots = static_cast<int>(distinct.size());
    pt.deviation = (pt.sample.x - family.xbar).norm();
    pt.pnorm = p1.norm() + norm_or_zero(p2);
    pt.ydist = norm_or_zero(pt.sample.Y - family.ybar);
    if (pt.pnorm > 0.0) pt.ratio_pert = pt.deviation / pt.pnorm;
    if (pt.pnorm + pt.ydist > 0.0) pt.ratio_pert_mult = pt.deviation / (pt.pnorm + pt.ydist);
    prev_x = pt.sample.x;
    prev_z = pt.sample.z;
    rep.points.push_back(std::move(pt));
  }

  std::vector<std::pair<double, double>> devs;
  std::vector<std::pair<double, std::optional<double>>> r101, r91;
  for (const auto& pt : rep.points) {
    if (pt.param > 0.0 && pt.deviation > 0.0) devs.emplace_back(pt.param, pt.deviation);
    r101.emplace_back(pt.param, pt.ratio_pert);
    r91.emplace_back(pt.param, pt.ratio_pert_mult);
  }
  if (devs.size() >= 2) {
    try {
      rep.exponent_fit = fit_order_exponent(devs);
    } catch (const InputError&) {
    }
  }
  rep.trend_pert = ratio_verdict(r101);
  rep.trend_pert_mult = ratio_verdict(r91);
  return rep;
}

XPartBoundReport xpart_bound_check(const ProblemData& pd, const Vec& xbar, const SymMat& ybar,
                                   const ErrorBoundReport& report, const SoscOptions& opt) {
  XPartBoundReport out;
  out.sosc = check_soscy(pd, make_kkt_point(pd, xbar, ybar), opt).verdict;
  for (const auto& pt : report.points) out.ratios.emplace_back(pt.param, pt.ratio_pert_mult);
  out.trend = ratio_verdict(out.ratios);
  out.consistent = !(out.sosc == SoscVerdict::Holds && out.trend.verdict == BoundVerdict::Diverging);
  return out;
}

namespace {

struct BlockSpec {
  const char* name;
  char mat;  // 'X', 'Y' or 'C' for the coupling residual
  int rows, cols;  // 0 alpha, 1 beta, 2 gamma
  double predicted;
  bool upper_bound_only;
  bool minus_base;
};

constexpr BlockSpec kBlocks[] = {
    {"X_aa - L_a", 'X', 0, 0, 1.0, false, true},
    {"X_ab", 'X', 0, 1, 1.0, false, false},
    {"X_bb", 'X', 1, 1, 1.0, true, false},
    {"X_ag", 'X', 0, 2, 1.0, false, false},
    {"Y_ag", 'Y', 0, 2, 1.0, false, false},
    {"Y_bb", 'Y', 1, 1, 1.0, true, false},
    {"Y_bg", 'Y', 1, 2, 1.0, false, false},
    {"Y_gg - L_g", 'Y', 2, 2, 1.0, false, true},
    {"X_bg", 'X', 1, 2, 2.0, false, false},
    {"X_gg", 'X', 2, 2, 2.0, false, false},
    {"Y_aa", 'Y', 0, 0, 2.0, false, false},
    {"Y_ab", 'Y', 0, 1, 2.0, false, false},
    {"Y_ag + L_a^-1 X_ag L_g", 'C', 0, 2, 2.0, false, false},
};

}  // namespace

std::vector<BlockOrder> graph_block_orders(const SymMat& abar, const BlockOrderOptions& opt) {
  if (opt.points < 2 || opt.directions < 1 || !(opt.s_min > 0.0) || !(opt.s_max > opt.s_min)) {
    throw InputError("order check needs >= 2 points, >= 1 direction and 0 < s_min < s_max");
  }
  const ConeContext base = ConeContext::from_sum(abar);
  const SpectralDecomp& dec = base.decomp;
  const std::vector<Index>* sets[3] = {&dec.alpha, &dec.beta, &dec.gamma};
  const Mat& P = dec.P;
  const Index p = abar.dim();
  const std::vector<double> grid = geometric_schedule(opt.s_min, opt.s_max, opt.points);
  const double floor = 1e-14 * std::max(1.0, abar.norm());

  std::vector<BlockOrder> table;
  for (const auto& b : kBlocks) {
    if (sets[b.rows]->empty() || sets[b.cols]->empty()) continue;
    BlockOrder row;
    row.block = b.name;
    row.predicted = b.predicted;
    row.upper_bound_only = b.upper_bound_only;
    row.min_exponent = std::numeric_limits<double>::infinity();
    row.max_exponent = -std::numeric_limits<double>::infinity();
    table.push_back(row);
  }

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> gauss;
  for (int dir = 0; dir < opt.directions; ++dir) {
    Mat g(p, p);
    for (Index i = 0; i < p; ++i)
      for (Index j = 0; j < p; ++j) g(i, j) = gauss(rng);
    SymMat delta = SymMat::symmetrized(g);
    delta *= 1.0 / delta.norm();

    std::vector<std::vector<std::pair<double, double>>> series(table.size());
    for (const double s : grid) {
      const ConeContext cur = ConeContext::from_sum(abar + s * delta);
      const Mat xt = P.transpose() * cur.X.full() * P;
      const Mat yt = P.transpose() * cur.Y.full() * P;
      size_t t = 0;
      for (const auto& b : kBlocks) {
        const auto& ri = *sets[b.rows];
        const auto& ci = *sets[b.cols];
        if (ri.empty() || ci.empty()) continue;
        Mat blk;
        if (b.mat == 'C') {
          const Vec la = dec.lambda(ri), lg = dec.lambda(ci);
          blk = block(yt, ri, ci) + la.cwiseInverse().asDiagonal() * block(xt, ri, ci) * lg.asDiagonal();
        } else {
          blk = block(b.mat == 'X' ? xt : yt, ri, ci);
          if (b.minus_base) blk -= dec.lambda(ri).asDiagonal().toDenseMatrix();
        }
        const double nrm = blk.norm();
        auto& row = table[t];
        row.max_scaled = std::max(row.max_scaled, nrm / std::pow(s, row.predicted));
        if (nrm > floor) series[t].emplace_back(s, nrm);
        ++t;
      }
    }
    for (size_t t = 0; t < table.size(); ++t) {
      if (series[t].size() < 2) continue;
      const double e = fit_order_exponent(series[t]).exponent;
      table[t].min_exponent = std::min(table[t].min_exponent, e);
      table[t].max_exponent = std::max(table[t].max_exponent, e);
      ++table[t].fits;
    }
  }
  return table;
}

}  // namespace kkt
