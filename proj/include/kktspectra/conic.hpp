#pragma once

#include <optional>
#include <vector>

#include "kktspectra/symmat.hpp"

namespace kkt {

/// Orthonormal basis (columns) of the null space of A. Singular values at or
/// below rel_tol * max(1, sigma_max) count as zero.
Mat null_space(const Mat& a, double rel_tol = 1e-10);

struct DirectionSearch {
  bool found = false;
  Vec v;  // scaled so that ||selector * v|| = 1
  /// Smallest phase-one infeasibility over the normalization LPs; 0 when found.
  double infeasibility = 0.0;
};

/// Looks for v with eq*v = 0, ge*v >= 0 and selector*v != 0. The cone is
/// homogeneous, so existence is decided exactly by the LPs
/// {eq v = 0, ge v >= 0, s*(selector v)_k = 1} over coordinates k and signs s.
/// Either constraint matrix may have zero rows.
DirectionSearch find_nonzero_direction(const Mat& eq, const Mat& ge, const Mat& selector,
                                       double tol = 1e-9);

/// Gram-Schmidt in the Frobenius inner product; drops dependent elements.
std::vector<SymMat> orthonormalize(const std::vector<SymMat>& basis, double tol = 1e-10);

struct MinEigBound {
  double lower = 0.0;  // attained lambda_min at `element`
  double upper = 0.0;  // cutting-plane bound
  SymMat element;
  int iterations = 0;
};

/// Kelley cutting planes for max lambda_min(sum w_i S_i) over |w_i| <= 1
/// (or over the trace-one slice when trace_normalized). The basis must be
/// Frobenius-orthonormal. Stops early once the sign relative to `threshold`
/// is decided.
MinEigBound maximize_min_eigenvalue(const std::vector<SymMat>& basis, bool trace_normalized,
                                    double threshold, int max_iter = 400);

/// Does span(basis) contain a positive definite matrix?
bool subspace_contains_pd(const std::vector<SymMat>& basis, Index dim);
/// A nonzero PSD element of span(basis) (trace one), if any.
std::optional<SymMat> subspace_nonzero_psd(const std::vector<SymMat>& basis, Index dim);

}  // namespace kkt
