#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kktspectra/cones.hpp"
#include "kktspectra/problem.hpp"

namespace kkt {

/// Support function of the second-order tangent set of S+ at X in the
/// direction H, evaluated at Y: 2 <Y, H X^+ H>. H must lie in C_{S+}(X, Y).
double sigma_term(const ConeContext& ctx, const SymMat& h);

/// d in C(xbar) iff G'(xbar) d in C_{S+}(G(xbar), ybar).
Membership critical_cone_x_membership(const ProblemData& pd, const Vec& xbar,
                                      const SymMat& ybar, const Vec& d);

/// Matrix Q with d' Q d = <d, hessL d> - sigma_term(G'(xbar) d).
Mat second_order_matrix(const ProblemData& pd, const Vec& xbar, const SymMat& ybar);

/// <d, hessL d> - sigma_term; throws InputError when d is outside C(xbar).
double evaluate_second_order_form(const ProblemData& pd, const Vec& xbar, const SymMat& ybar,
                                  const Vec& d);

enum class SoscVerdict { Holds, Fails, Undetermined };
const char* to_string(SoscVerdict v);

struct SoscOptions {
  int starts = 64;
  int iterations = 500;
  double step = 0.1;
  double tol_pos = 1e-8;
  double tol_zero = -1.0;  // eigenvalue partition; negative means default_zero_tol
  double tol_feas = kCertifiedTol;
  std::uint64_t seed = 42;
};

struct SecondOrderReport {
  double min_value = 0.0;  // +inf when C(xbar) = {0}
  Vec minimizer;
  SoscVerdict verdict = SoscVerdict::Undetermined;
  bool sonc_holds = false;
  bool exact = false;      // min_value is the true minimum over sphere and cone
  int cone_dim = 0;        // dimension of the linear hull constraints' solution space
  int starts = 0;
  int iterations = 0;
};

SecondOrderReport check_soscy(const ProblemData& pd, const KKTPoint& kkt,
                              const SoscOptions& opt = {});

struct CriticalProjectionCheck {
  bool lhs = false;  // dA == Pi'(C; dA + dB)
  bool rhs = false;  // the three-part characterization
};

CriticalProjectionCheck critical_projection_check(const SymMat& c, const SymMat& da, const SymMat& db,
                          double tol = kConeTol);

enum class CondVerdict { Holds, Fails, Undetermined };
const char* to_string(CondVerdict v);

struct ClosednessReport {
  CondVerdict cond_i = CondVerdict::Undetermined;
  std::string cond_i_evidence;
  CondVerdict cond_ii = CondVerdict::Undetermined;
  double cond_ii_max_violation = 0.0;
  int accepted = 0;
  int rejected = 0;
};

struct ClosednessOptions {
  int samples = 2000;
  double tol_zero = -1.0;
  double tol_feas = kCertifiedTol;
  std::uint64_t seed = 42;
};

/// Conditions (i) closedness of G'(xbar)* K and (ii) orthogonality of the
/// K-projections over the sampled derivative cone, K the polar of the
/// critical cone of S+ at (G(xbar), ybar).
ClosednessReport closedness_conditions(const ProblemData& pd, const KKTPoint& kkt,
                                   const ClosednessOptions& opt = {});

struct MultiplierSample {
  double param = 0.0;
  SymMat y;
  Vec p1;
  SymMat p2;
};

struct MultiplierRatio {
  double param = 0.0;
  double distance = 0.0;  // d1 + d2 of the multiplier residual
  double pnorm = 0.0;     // ||p1|| + ||p2||
  double ratio = 0.0;     // 0 when pnorm == 0
};

std::vector<MultiplierRatio> multiplier_distance_estimate(const ProblemData& pd, const Vec& xbar,
                                                          const std::vector<MultiplierSample>& samples);

}  // namespace kkt
