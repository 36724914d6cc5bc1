#pragma once

#include "lrt/dataset.hpp"
#include "lrt/rpca.hpp"
#include "lrt/transform_learning.hpp"

#include <vector>

namespace lrt {

struct Prediction {
  int label = -1;
  double score = 0.0;  // lower is better; distance or OMP residual
  std::vector<double> class_scores;
};

/// Label of the Euclidean-nearest gallery column; ties break toward the
/// lowest column index. Score vector holds the best distance per class.
Prediction nn_classify(const DataMatrix& gallery, const Vector& probe);

/// Per-class low-rank dictionaries recovered by RPCA from transformed
/// training data: L_i from T * Y_i (global) or T_i * Y_i (per-class).
struct LowRankModel {
  TransformKind protocol = TransformKind::Global;
  std::vector<Transform> transforms;    // one, or one per class
  std::vector<Matrix> dictionaries;     // L_i, class-indexed
  RpcaConfig rpca{};
  std::vector<int> nonconverged_classes;
  std::vector<std::string> class_names;

  bool all_converged() const { return nonconverged_classes.empty(); }
  int num_classes() const { return static_cast<int>(dictionaries.size()); }
  const Transform& transform_for(int c) const;
};

/// Builds the model; transforms must be a single global transform or exactly
/// one per class. RPCA non-convergence flags the class but keeps its
/// decomposition.
LowRankModel build_lowrank_model(const std::vector<Transform>& transforms,
                                 const DataMatrix& train,
                                 const RpcaConfig& cfg = {},
                                 unsigned threads = 0);

/// Global protocol: score_i = OMP residual of T*probe over dictionary L_i,
/// label = argmin.
Prediction lrt_omp_classify(const LowRankModel& model, const Vector& probe,
                            int s_max);

/// Per-class protocol: every T_i is applied to the probe and the best
/// (smallest OMP residual over L_i) class wins.
Prediction class_lrt_classify(const LowRankModel& model, const Vector& probe,
                              int s_max);

/// Per-class transformed galleries T_i * Y_i, precomputed once so batches of
/// probes avoid retransforming the training data.
struct ClassNnGallery {
  std::vector<Matrix> galleries;   // T_i * Y_i, class-indexed
  std::vector<Matrix> transforms;  // T_i, class-indexed
};

ClassNnGallery build_class_nn_gallery(const DataMatrix& train,
                                      const std::vector<Transform>& transforms);

/// Per-class NN protocol: score_i = min distance between T_i*probe and the
/// columns of T_i*Y_i.
Prediction class_lrt_nn_classify(const ClassNnGallery& gallery,
                                 const Vector& probe);
Prediction class_lrt_nn_classify(const DataMatrix& train,
                                 const std::vector<Transform>& transforms,
                                 const Vector& probe);

struct EvaluationReport {
  double accuracy = 0.0;  // percent
  int total = 0;
  int correct = 0;
  std::vector<int> class_labels;
  std::vector<double> per_class_accuracy;  // percent, aligned with labels
  std::vector<int> per_class_total;
  Eigen::MatrixXi confusion;  // row = truth, col = predicted
};

EvaluationReport evaluate(const std::vector<int>& predicted,
                          const std::vector<int>& truth);
EvaluationReport evaluate(const std::vector<Prediction>& predictions,
                          const std::vector<int>& truth);

}  // namespace lrt
