#include "lrt/omp.hpp"

#include <cmath>
#include <stdexcept>

namespace lrt {

SparseCode omp_solve(const Matrix& dictionary, const Vector& y, int s_max) {
  detail::require_finite(dictionary, "omp_solve");
  if (y.size() != dictionary.rows()) {
    throw std::invalid_argument(
        "omp_solve: signal length must equal dictionary row count");
  }
  if (!y.allFinite()) {
    throw std::invalid_argument("omp_solve: non-finite signal");
  }
  if (s_max < 1) throw std::invalid_argument("omp_solve: s_max must be >= 1");

  constexpr double kResidualStop = 1e-10;
  const Index atoms = dictionary.cols();
  const Vector col_norms = dictionary.colwise().norm();

  SparseCode code;
  Vector residual = y;
  code.residual_history.push_back(residual.norm());
  std::vector<bool> selected(static_cast<size_t>(atoms), false);
  Matrix active(dictionary.rows(), 0);

  while (static_cast<int>(code.support.size()) < s_max &&
         residual.norm() > kResidualStop) {
    const Vector corr = dictionary.transpose() * residual;
    Index best = -1;
    double best_score = 0;
    for (Index j = 0; j < atoms; ++j) {
      if (selected[static_cast<size_t>(j)] || col_norms(j) == 0) continue;
      const double score = std::abs(corr(j)) / col_norms(j);
      if (score > best_score) {  // strict: ties keep the lowest index
        best_score = score;
        best = j;
      }
    }
    // Dead stop: nothing correlates with what is left of the signal.
    if (best < 0 || best_score <= 1e-12 * residual.norm()) break;

    selected[static_cast<size_t>(best)] = true;
    code.support.push_back(best);
    active.conservativeResize(Eigen::NoChange, active.cols() + 1);
    active.col(active.cols() - 1) = dictionary.col(best);

    // Complete orthogonal decomposition: exact least squares even when the
    // active set goes rank-deficient (low-rank dictionaries do).
    code.coefficients = active.completeOrthogonalDecomposition().solve(y);
    residual = y - active * code.coefficients;
    code.residual_history.push_back(residual.norm());
  }
  code.residual_norm = residual.norm();
  return code;
}

}  // namespace lrt
