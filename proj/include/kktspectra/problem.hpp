#pragma once

#include <functional>
#include <string>
#include <vector>

#include "kktspectra/cones.hpp"
#include "kktspectra/symmat.hpp"

namespace kkt {

/// min f(x) s.t. G(x) in S^p_+, with
///   f(x) = f_lin' x + 1/2 x' f_quad x
///   G(x) = A0 + sum_i x_i A_i + 1/2 sum_ij x_i x_j B_ij,   B_ij = B_ji.
struct ProblemData {
  Index n = 0;
  Index p = 0;
  Vec f_lin;
  Mat f_quad;
  SymMat g_const;
  std::vector<SymMat> g_lin;
  std::vector<std::vector<SymMat>> g_quad;

  /// All-zero data of the given shape.
  static ProblemData zeros(Index n, Index p);
  /// Throws InputError on inconsistent shapes, asymmetric f_quad or B_ij != B_ji.
  void validate() const;
  bool is_diagonal(double tol = 0.0) const;
};

double eval_f(const ProblemData& pd, const Vec& x);
Vec eval_grad_f(const ProblemData& pd, const Vec& x);
Mat eval_hess_f(const ProblemData& pd);
SymMat eval_G(const ProblemData& pd, const Vec& x);
/// D_i(x) = A_i + sum_j x_j B_ij.
std::vector<SymMat> eval_G_jacobian(const ProblemData& pd, const Vec& x);
const std::vector<std::vector<SymMat>>& eval_G_second(const ProblemData& pd);

/// G'(x) d = sum_i d_i D_i(x).
SymMat jacobian_apply(const std::vector<SymMat>& jac, const Vec& d);
/// (G'(x)* Y)_i = <D_i(x), Y>.
Vec adjoint_apply(const std::vector<SymMat>& jac, const SymMat& y);
Vec adjoint_jacobian_apply(const ProblemData& pd, const Vec& x, const SymMat& y);

/// Hessian in x of f(x) + <Y, G(x)>.
Mat lagrangian_hessian(const ProblemData& pd, const Vec& x, const SymMat& y);
Vec lagrangian_gradient(const ProblemData& pd, const Vec& x, const SymMat& y);

struct KKTResidual {
  double r1 = 0.0;  // ||grad f + G'* Y||
  double r2 = 0.0;  // ||G(x) - Pi_+(G(x) + Y)||_F
  double max() const { return std::max(r1, r2); }
};

KKTResidual kkt_residual(const ProblemData& pd, const Vec& x, const SymMat& y);

inline constexpr double kCertifiedTol = 1e-8;

struct KKTPoint {
  Vec x;
  SymMat Y;
  KKTResidual residual;
  bool certified() const { return residual.max() <= kCertifiedTol; }
};

KKTPoint make_kkt_point(const ProblemData& pd, const Vec& x, const SymMat& y);

struct NormalMapValue {
  Vec psi1;
  SymMat psi2;
  double norm() const { return std::hypot(psi1.norm(), psi2.norm()); }
};

/// Psi(x, z) = (grad f(x) + G'(x)*(z - Pi_+(z)),  G(x) - Pi_+(z)).
NormalMapValue robinson_normal_map(const ProblemData& pd, const Vec& x, const SymMat& z);

struct MultiplierResidual {
  double d1 = 0.0;  // distance to {Y : grad_x L(xbar, Y) = 0}
  double d2 = 0.0;  // distance to N(G(xbar); S+)
};

MultiplierResidual multiplier_set_residual(const ProblemData& pd, const Vec& xbar,
                                           const SymMat& y);

/// Euclidean projection onto N(X; S+) for PSD X.
SymMat project_normal_cone(const SymMat& x_psd, const SymMat& y);

/// Data of the canonically perturbed problem: f_lin - p1 and A0 + p2, so that
/// its KKT points are the solutions of Psi(x, z) = (p1, -p2) for the base data.
ProblemData perturbed(const ProblemData& pd, const Vec& p1, const SymMat& p2);

/// A registered perturbation family around a reference KKT point.
struct Family {
  std::string name;
  ProblemData base;
  Vec xbar;
  SymMat ybar;
  /// Canonical perturbation (p1, p2) at parameter value s.
  std::function<std::pair<Vec, SymMat>(double)> perturbation;
};

/// min x1 + x1^2 + x2^2  s.t.  Diag(x) + eps*A in S^2_+  (base at eps = 0).
ProblemData example2_problem(double eps, const SymMat& a);
Family example2_family(const SymMat& a);
SymMat example2_default_a();

/// min x1^2 + x2^2 + x1 x2 - sqrt(t) (5/sqrt3 x1 + 4/sqrt3 x2)
/// s.t. [[x1^2 + x1 x2, 0], [0, x2^2 + x1 x2]] - t*diag(2,1) in S^2_+.
ProblemData example3_problem(double t);
Family example3_family();

/// Closed-form primal path of the example-3 family.
Vec example3_path(double t);

}  // namespace kkt
