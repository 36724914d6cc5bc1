#pragma once

#include "lrt/dataset.hpp"
#include "lrt/linalg.hpp"

#include <utility>
#include <vector>

namespace lrt {

enum class TransformKind { Global, PerClass };

/// A learned d x d linear map. After any learning iteration the matrix has
/// unit spectral norm.
struct Transform {
  Matrix matrix;
  TransformKind kind = TransformKind::Global;
  int class_index = -1;

  Index dim() const { return matrix.rows(); }
};

struct LearnConfig {
  double lambda = 0.1;    // discrimination weight, >= 0
  double step_size = 0.05;  // nu, > 0
  int iterations = 100;
  DeltaPolicy delta{};
  std::uint64_t seed = 0;
  bool record_trace = false;
  /// Apply the update as T + nu * dT instead of the descending T - nu * dT.
  bool literal_plus_update = false;
  /// Halve the step size after five consecutive objective increases.
  bool backtracking = false;
  /// 0 = use default_thread_count() for per-class learning.
  unsigned threads = 0;

  void validate() const;
};

/// Objective values in true nuclear norms, one per iteration plus the
/// initial point.
struct LearnTrace {
  std::vector<double> objective_values;
  double final_objective = 0.0;
};

/// ||T Y_i||_* - lambda ||T Y_not_i||_*. Y_not_i may have zero columns, in
/// which case the discrimination term is absent.
double class_objective(const Matrix& t, const Matrix& y_class,
                       const Matrix& y_rest, double lambda);

/// (1/N) sum_i ||T Y_i||_* - lambda ||T Y||_*.
double global_objective(const Matrix& t, const DataMatrix& data,
                        double lambda);

/// Subgradient of the class objective via the matrix-norm surrogate:
///   dT = subdiff(T Y_i) Y_i^T - lambda subdiff(T Y_not_i) Y_not_i^T.
Matrix class_gradient(const Matrix& t, const Matrix& y_class,
                      const Matrix& y_rest, double lambda,
                      const DeltaPolicy& delta, std::mt19937_64& rng);

/// Subgradient of the global objective:
///   dT = (1/N) sum_i subdiff(T Y_i) Y_i^T - lambda subdiff(T Y) Y^T.
Matrix global_gradient(const Matrix& t, const DataMatrix& data, double lambda,
                       const DeltaPolicy& delta, std::mt19937_64& rng);

struct ClassLearnResult {
  std::vector<Transform> transforms;  // one per class, in label order
  std::vector<LearnTrace> traces;     // parallel to transforms
};

/// Gradient descent with per-iteration spectral normalization, one transform
/// per class. Classes learn independently (parallel) on rng streams derived
/// from seed and class index, so results do not depend on scheduling.
ClassLearnResult learn_class_transforms(const DataMatrix& train,
                                        const LearnConfig& cfg);

/// Same loop for the single global transform.
std::pair<Transform, LearnTrace> learn_global_transform(
    const DataMatrix& train, const LearnConfig& cfg);

}  // namespace lrt
