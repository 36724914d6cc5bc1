#pragma once

#include "lrt/linalg.hpp"

#include <vector>

namespace lrt {

struct SparseCode {
  std::vector<Index> support;  // distinct column indices, selection order
  Vector coefficients;         // aligned with support
  double residual_norm = 0.0;  // ||y - D x||_2
  /// ||r|| after 0, 1, ... atoms; non-increasing.
  std::vector<double> residual_history;
};

/// Greedy orthogonal matching pursuit for min ||y - D x||_2 with
/// ||x||_0 <= s_max. Atom selection maximizes |d^T r| / ||d|| (scale-free);
/// ties break toward the lowest column index, zero columns are ineligible.
/// The active-set coefficients are least-squares refit after each selection.
/// Stops at s_max atoms, at residual <= 1e-10, or when no eligible column
/// correlates with the residual.
SparseCode omp_solve(const Matrix& dictionary, const Vector& y, int s_max);

}  // namespace lrt
