#pragma once

#include "lrt/linalg.hpp"

#include <optional>

namespace lrt {

struct RpcaConfig {
  /// Sparsity weight beta; unset picks 1/sqrt(max(rows, cols)).
  std::optional<double> beta{};
  double tol = 1e-7;  // on the relative constraint residual
  int max_iter = 500;

  void validate() const;
  double resolve_beta(Index rows, Index cols) const;
};

struct RpcaResult {
  Matrix L;
  Matrix S;
  bool converged = false;
  int iterations_used = 0;
  double residual = 0.0;  // ||M - L - S||_F / ||M||_F at exit
};

/// Splits M into low-rank L plus sparse S, approximately minimizing
/// ||L||_* + beta ||S||_1 subject to M = L + S. Inexact augmented Lagrangian
/// iteration: singular value thresholding for L, entrywise soft thresholding
/// for S, multiplicative penalty growth. On non-convergence the best iterate
/// is returned with converged = false.
RpcaResult rpca_decompose(const Matrix& m, const RpcaConfig& cfg = {});

}  // namespace lrt
