#pragma once

#include "kktspectra/symmat.hpp"

namespace kkt {

/// Absolute tolerance on compressed blocks used by every membership test.
inline constexpr double kConeTol = 1e-7;

/// A point (X, Y) of the graph of the normal cone to the PSD cone, together
/// with the spectral decomposition of A = X + Y. X = Pi_+(A), Y = A - X.
struct ConeContext {
  SymMat X;
  SymMat Y;
  SpectralDecomp decomp;

  /// Moreau split of A.
  static ConeContext from_sum(const SymMat& a);
  static ConeContext from_sum(const SymMat& a, double tol_zero);
  /// From a complementary pair; throws InputError if X is not PSD, Y is not
  /// NSD, or <X, Y> is not ~0 (all to 1e-8 relative).
  static ConeContext from_pair(const SymMat& x, const SymMat& y);
  static ConeContext from_pair(const SymMat& x, const SymMat& y, double tol_zero);

  Index dim() const { return decomp.dim(); }
  const std::vector<Index>& alpha() const { return decomp.alpha; }
  const std::vector<Index>& beta() const { return decomp.beta; }
  const std::vector<Index>& gamma() const { return decomp.gamma; }
};

struct Membership {
  bool member = false;
  double violation = 0.0;
};

/// T(X; S+) = {H : [P_b P_g]^T H [P_b P_g] >= 0}.
Membership tangent_membership(const ConeContext& ctx, const SymMat& h,
                              double tol = kConeTol);
/// N(X; S+) = {H : [P_b P_g]^T H [P_b P_g] <= 0, P_a^T H P = 0}.
Membership normal_membership(const ConeContext& ctx, const SymMat& h,
                             double tol = kConeTol);
/// C_{S+}(X, Y) = {H : P_g^T H [P_b P_g] = 0, P_b^T H P_b >= 0}.
Membership critical_cone_psd_membership(const ConeContext& ctx, const SymMat& h,
                                        double tol = kConeTol);
/// C_{S-}(Y, X) = {H : P_a^T H [P_a P_b] = 0, P_b^T H P_b <= 0}.
Membership critical_cone_nsd_membership(const ConeContext& ctx, const SymMat& h,
                                        double tol = kConeTol);

struct GraphTangentMembership {
  bool member_blocks = false;  // blockwise characterization
  bool member_deriv = false;   // H1 == Pi'(X+Y; H1+H2)
  double violation_blocks = 0.0;
  double violation_deriv = 0.0;
  double violation() const { return std::max(violation_blocks, violation_deriv); }
};

/// Tangent cone to gph N(.; S+) at (X, Y), evaluated two independent ways.
GraphTangentMembership graph_tangent_membership(const ConeContext& ctx,
                                                const SymMat& h1, const SymMat& h2,
                                                double tol = kConeTol);

/// Euclidean projection onto C_{S+}(X, Y).
SymMat project_critical_cone(const ConeContext& ctx, const SymMat& z);
/// Projection onto the polar cone, Z - Pi_C(Z).
SymMat project_critical_cone_polar(const ConeContext& ctx, const SymMat& z);

/// N(X; S+) is polyhedral iff |alpha| >= p - 1.
bool is_normal_cone_polyhedral(const ConeContext& ctx);
/// rank(X) + rank(Y) = p, i.e. beta is empty.
bool strict_complementarity(const ConeContext& ctx);

}  // namespace kkt
