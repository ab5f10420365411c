#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kktspectra/cones.hpp"
#include "kktspectra/problem.hpp"

namespace kkt {

/// Everything the generalized derivative system at a KKT pair needs.
struct CriticalitySystem {
  Vec xbar;
  SymMat ybar;
  Mat hessL;                         // Hessian of the Lagrangian at (xbar, ybar)
  std::vector<SymMat> jac;           // D_i = dG/dx_i at xbar
  std::vector<SymMat> jac_tilde;     // P^T D_i P
  ConeContext ctx;                   // split of A = G(xbar) + ybar
  Mat sigma;                         // divided differences of A

  Index n() const { return hessL.rows(); }
  Index p() const { return ctx.dim(); }
};

/// Throws InputError when the KKT residual exceeds tol_feas. A negative
/// tol_zero picks the default eigenvalue partition tolerance.
CriticalitySystem build_system(const ProblemData& pd, const KKTPoint& kkt);
CriticalitySystem build_system(const ProblemData& pd, const KKTPoint& kkt, double tol_zero,
                               double tol_feas = kCertifiedTol);

/// ||hessL xi + G'* eta|| + ||G' xi - Pi'(A; G' xi + eta)||_F.
double witness_residual(const CriticalitySystem& sys, const Vec& xi, const SymMat& eta);

enum class Verdict { Critical, Noncritical, Undetermined };
const char* to_string(Verdict v);

struct Certificate {
  bool exhaustive = false;
  std::string method;     // linear, common-basis, angle-grid, random-bases, branches
  int bases = 0;          // beta-block bases tried
  int branches = 0;       // complementarity splits tried
  int lps = 0;            // homogeneous feasibility problems solved
  double best_infeasibility = 0.0;
  std::string describe() const;
};

struct CriticalityVerdict {
  Verdict tag = Verdict::Undetermined;
  std::optional<Vec> xi;      // unit norm
  std::optional<SymMat> eta;
  Certificate certificate;
  double residual = 0.0;      // witness_residual of (xi, eta)
};

struct ClassifyOptions {
  int grid_points = 181;
  int samples = 64;
  std::uint64_t seed = 42;
};

inline constexpr double kWitnessTol = 1e-7;

CriticalityVerdict classify_multiplier(const CriticalitySystem& sys,
                                       const ClassifyOptions& opt = {});

struct XPartResult {
  bool holds = true;
  std::optional<Vec> witness;
};

/// hessL xi = 0 and G' xi = Pi'(A; G' xi) only for xi = 0.
XPartResult xpart_condition(const CriticalitySystem& sys);

/// Robinson's constraint qualification at a feasible xbar.
bool check_rcq(const ProblemData& pd, const Vec& xbar);
/// Strict Robinson constraint qualification at (xbar, ybar).
bool check_srcq(const ProblemData& pd, const Vec& xbar, const SymMat& ybar);

/// Scalar form of a problem whose data are all diagonal:
///   g_k(x) = G(x)_kk >= 0 with multipliers y_k = ybar_kk <= 0.
struct NLPSystem {
  Mat hessL;                 // n x n
  Mat grads;                 // p x n, row k = g_k'(xbar)
  Vec g;                     // g_k(xbar)
  Vec y;                     // multipliers
  std::vector<Index> inactive;  // g_k > 0
  std::vector<Index> minus;     // y_k < 0
  std::vector<Index> zero;      // g_k = y_k = 0
};

/// Empty when some matrix of the data or ybar is not diagonal.
std::optional<NLPSystem> diagonal_reduction(const ProblemData& pd, const KKTPoint& kkt);
/// Exact enumeration of the active-set branches over the biactive indices.
CriticalityVerdict classify_nlp(const NLPSystem& nlp);

}  // namespace kkt
