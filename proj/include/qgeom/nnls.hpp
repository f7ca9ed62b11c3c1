#pragma once

#include "qgeom/core.hpp"

namespace qgeom {

struct NnlsResult {
  RVec x;
  double residual = 0;  // ‖Ax − b‖
  bool converged = false;
};

// Lawson–Hanson active-set solver for min ‖Ax − b‖ subject to x >= 0.
NnlsResult nnls(const RMat& a, const RVec& b, int max_iter = 0, double tol = 1e-12);

// Nonnegative x with Σx = 1 and Ax ≈ b; the simplex row is weighted heavily.
NnlsResult simplex_nnls(const RMat& a, const RVec& b, double weight = 1e4);

}  // namespace qgeom
