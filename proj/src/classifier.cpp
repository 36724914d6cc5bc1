#include "lrt/classifier.hpp"

#include "lrt/omp.hpp"
#include "lrt/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace lrt {

namespace {

int argmin_label(const std::vector<double>& scores) {
  int best = -1;
  double best_score = std::numeric_limits<double>::infinity();
  for (size_t c = 0; c < scores.size(); ++c) {
    if (scores[c] < best_score) {  // strict: ties keep the lowest class
      best_score = scores[c];
      best = static_cast<int>(c);
    }
  }
  return best;
}

Prediction from_scores(std::vector<double> scores) {
  Prediction p;
  p.label = argmin_label(scores);
  if (p.label < 0) throw std::invalid_argument("classify: no classes scored");
  p.score = scores[static_cast<size_t>(p.label)];
  p.class_scores = std::move(scores);
  return p;
}

// Transforms indexed by class; accepts one global transform or exactly one
// per-class transform for each class in [0, n).
std::vector<const Transform*> transforms_by_class(
    const std::vector<Transform>& transforms, int n, const char* op) {
  std::vector<const Transform*> by_class(static_cast<size_t>(n), nullptr);
  if (transforms.size() == 1 &&
      transforms[0].kind == TransformKind::Global) {
    for (auto& slot : by_class) slot = &transforms[0];
    return by_class;
  }
  for (const auto& t : transforms) {
    if (t.kind != TransformKind::PerClass || t.class_index < 0 ||
        t.class_index >= n) {
      throw std::invalid_argument(std::string(op) +
                                  ": transform/class set mismatch");
    }
    auto& slot = by_class[static_cast<size_t>(t.class_index)];
    if (slot) {
      throw std::invalid_argument(std::string(op) +
                                  ": duplicate transform for a class");
    }
    slot = &t;
  }
  for (const auto* slot : by_class) {
    if (!slot) {
      throw std::invalid_argument(std::string(op) +
                                  ": missing transform for a class");
    }
  }
  return by_class;
}

}  // namespace

Prediction nn_classify(const DataMatrix& gallery, const Vector& probe) {
  gallery.validate();
  if (gallery.count() == 0) {
    throw std::invalid_argument("nn_classify: empty gallery");
  }
  if (probe.size() != gallery.dim()) {
    throw std::invalid_argument("nn_classify: probe/gallery dim mismatch");
  }
  std::vector<double> scores(static_cast<size_t>(gallery.num_classes()),
                             std::numeric_limits<double>::infinity());
  for (Index k = 0; k < gallery.count(); ++k) {
    const double dist = (gallery.samples.col(k) - probe).norm();
    auto& best = scores[static_cast<size_t>(gallery.labels[static_cast<size_t>(k)])];
    if (dist < best) best = dist;
  }
  return from_scores(std::move(scores));
}

const Transform& LowRankModel::transform_for(int c) const {
  if (protocol == TransformKind::Global) return transforms.at(0);
  return transforms.at(static_cast<size_t>(c));
}

LowRankModel build_lowrank_model(const std::vector<Transform>& transforms,
                                 const DataMatrix& train,
                                 const RpcaConfig& cfg, unsigned threads) {
  train.validate();
  cfg.validate();
  const int n = train.num_classes();
  if (n < 1 || transforms.empty()) {
    throw std::invalid_argument("build_lowrank_model: empty input");
  }
  const auto by_class =
      transforms_by_class(transforms, n, "build_lowrank_model");

  LowRankModel model;
  model.protocol = transforms.size() == 1 && transforms[0].kind == TransformKind::Global
                       ? TransformKind::Global
                       : TransformKind::PerClass;
  model.rpca = cfg;
  model.class_names = train.class_names;
  model.dictionaries.resize(static_cast<size_t>(n));
  if (model.protocol == TransformKind::Global) {
    model.transforms = {transforms[0]};
  } else {
    model.transforms.resize(static_cast<size_t>(n));
    for (const auto& t : transforms) {
      model.transforms[static_cast<size_t>(t.class_index)] = t;
    }
  }

  std::vector<char> converged(static_cast<size_t>(n), 1);
  parallel_for(
      static_cast<size_t>(n),
      [&](size_t ci) {
        const int c = static_cast<int>(ci);
        const Matrix yi = train.class_submatrix(c);
        if (yi.cols() == 0) {
          throw std::invalid_argument("build_lowrank_model: class " +
                                      std::to_string(c) + " has zero samples");
        }
        if (by_class[ci]->matrix.cols() != train.dim()) {
          throw std::invalid_argument(
              "build_lowrank_model: transform/data dimension mismatch");
        }
        RpcaResult r = rpca_decompose(by_class[ci]->matrix * yi, cfg);
        model.dictionaries[ci] = std::move(r.L);
        converged[ci] = r.converged ? 1 : 0;
      },
      threads);
  for (int c = 0; c < n; ++c) {
    if (!converged[static_cast<size_t>(c)]) {
      model.nonconverged_classes.push_back(c);
    }
  }
  return model;
}

Prediction lrt_omp_classify(const LowRankModel& model, const Vector& probe,
                            int s_max) {
  if (model.num_classes() == 0) {
    throw std::invalid_argument("lrt_omp_classify: empty model");
  }
  if (model.protocol != TransformKind::Global) {
    throw std::invalid_argument(
        "lrt_omp_classify: model was built per-class; use class_lrt_classify");
  }
  const Vector tp = model.transforms[0].matrix * probe;
  std::vector<double> scores(static_cast<size_t>(model.num_classes()));
  for (int c = 0; c < model.num_classes(); ++c) {
    scores[static_cast<size_t>(c)] =
        omp_solve(model.dictionaries[static_cast<size_t>(c)], tp, s_max)
            .residual_norm;
  }
  return from_scores(std::move(scores));
}

Prediction class_lrt_classify(const LowRankModel& model, const Vector& probe,
                              int s_max) {
  if (model.num_classes() == 0) {
    throw std::invalid_argument("class_lrt_classify: empty model");
  }
  if (model.protocol != TransformKind::PerClass) {
    throw std::invalid_argument(
        "class_lrt_classify: model was built globally; use lrt_omp_classify");
  }
  std::vector<double> scores(static_cast<size_t>(model.num_classes()));
  for (int c = 0; c < model.num_classes(); ++c) {
    const Vector tp = model.transform_for(c).matrix * probe;
    scores[static_cast<size_t>(c)] =
        omp_solve(model.dictionaries[static_cast<size_t>(c)], tp, s_max)
            .residual_norm;
  }
  return from_scores(std::move(scores));
}

ClassNnGallery build_class_nn_gallery(
    const DataMatrix& train, const std::vector<Transform>& transforms) {
  train.validate();
  if (train.count() == 0) {
    throw std::invalid_argument("build_class_nn_gallery: empty gallery");
  }
  const int n = train.num_classes();
  const auto by_class =
      transforms_by_class(transforms, n, "class_lrt_nn_classify");
  ClassNnGallery out;
  out.galleries.resize(static_cast<size_t>(n));
  out.transforms.resize(static_cast<size_t>(n));
  for (int c = 0; c < n; ++c) {
    const Matrix yi = train.class_submatrix(c);
    if (yi.cols() == 0) {
      throw std::invalid_argument("class_lrt_nn_classify: class " +
                                  std::to_string(c) + " has zero samples");
    }
    out.transforms[static_cast<size_t>(c)] = by_class[static_cast<size_t>(c)]->matrix;
    out.galleries[static_cast<size_t>(c)] =
        by_class[static_cast<size_t>(c)]->matrix * yi;
  }
  return out;
}

Prediction class_lrt_nn_classify(const ClassNnGallery& gallery,
                                 const Vector& probe) {
  if (gallery.galleries.empty()) {
    throw std::invalid_argument("class_lrt_nn_classify: empty gallery");
  }
  std::vector<double> scores(gallery.galleries.size(),
                             std::numeric_limits<double>::infinity());
  for (size_t c = 0; c < gallery.galleries.size(); ++c) {
    if (probe.size() != gallery.transforms[c].cols()) {
      throw std::invalid_argument("class_lrt_nn_classify: probe dim mismatch");
    }
    const Vector tp = gallery.transforms[c] * probe;
    const Matrix& ty = gallery.galleries[c];
    for (Index k = 0; k < ty.cols(); ++k) {
      scores[c] = std::min(scores[c], (ty.col(k) - tp).norm());
    }
  }
  return from_scores(std::move(scores));
}

Prediction class_lrt_nn_classify(const DataMatrix& train,
                                 const std::vector<Transform>& transforms,
                                 const Vector& probe) {
  return class_lrt_nn_classify(build_class_nn_gallery(train, transforms),
                               probe);
}

EvaluationReport evaluate(const std::vector<int>& predicted,
                          const std::vector<int>& truth) {
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument(
        "evaluate: prediction/truth length mismatch");
  }
  if (truth.empty()) throw std::invalid_argument("evaluate: empty input");

  std::map<int, int> label_index;
  for (int l : truth) label_index.emplace(l, 0);
  for (int l : predicted) label_index.emplace(l, 0);
  int next = 0;
  for (auto& [label, idx] : label_index) idx = next++;

  EvaluationReport rep;
  rep.total = static_cast<int>(truth.size());
  rep.class_labels.reserve(label_index.size());
  for (const auto& [label, idx] : label_index) rep.class_labels.push_back(label);
  rep.confusion = Eigen::MatrixXi::Zero(next, next);
  rep.per_class_accuracy.assign(label_index.size(), 0.0);
  rep.per_class_total.assign(label_index.size(), 0);

  std::vector<int> per_class_correct(label_index.size(), 0);
  for (size_t k = 0; k < truth.size(); ++k) {
    const int ti = label_index[truth[k]];
    const int pi = label_index[predicted[k]];
    rep.confusion(ti, pi) += 1;
    rep.per_class_total[static_cast<size_t>(ti)] += 1;
    if (truth[k] == predicted[k]) {
      rep.correct += 1;
      per_class_correct[static_cast<size_t>(ti)] += 1;
    }
  }
  for (size_t c = 0; c < label_index.size(); ++c) {
    if (rep.per_class_total[c] > 0) {
      rep.per_class_accuracy[c] =
          100.0 * per_class_correct[c] / rep.per_class_total[c];
    }
  }
  rep.accuracy = 100.0 * rep.correct / rep.total;
  return rep;
}

EvaluationReport evaluate(const std::vector<Prediction>& predictions,
                          const std::vector<int>& truth) {
  std::vector<int> labels;
  labels.reserve(predictions.size());
  for (const auto& p : predictions) labels.push_back(p.label);
  return evaluate(labels, truth);
}

}  // namespace lrt
