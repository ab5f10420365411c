#pragma once

#include "kktspectra/symmat.hpp"

namespace kkt::lp {

/// minimize c^T x  s.t.  A_eq x = b_eq,  A_ge x >= b_ge,  x free.
/// Empty matrices mean "no constraints of that kind" (cols must still match
/// the variable count when non-empty).
struct Problem {
  Index num_vars = 0;
  Mat a_eq;
  Vec b_eq;
  Mat a_ge;
  Vec b_ge;
  Vec cost;  // empty = pure feasibility
};

enum class Status { Optimal, Infeasible, Unbounded };

struct Result {
  Status status = Status::Infeasible;
  Vec x;
  double objective = 0.0;
  /// Optimal phase-one value (sum of artificial variables); 0 when feasible.
  double infeasibility = 0.0;
  int pivots = 0;
};

/// Dense two-phase tableau simplex with Bland's rule.
Result solve(const Problem& problem, double tol = 1e-9);

}  // namespace kkt::lp
