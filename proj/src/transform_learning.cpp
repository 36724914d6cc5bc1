#include "lrt/transform_learning.hpp"

#include "lrt/parallel.hpp"

#include <stdexcept>
#include <string>

namespace lrt {

namespace {

void require_shapes(const Matrix& t, const Matrix& y, const char* op) {
  if (t.rows() != t.cols()) {
    throw std::invalid_argument(std::string(op) + ": transform must be square");
  }
  if (y.cols() > 0 && y.rows() != t.cols()) {
    throw std::invalid_argument(std::string(op) +
                                ": transform/data dimension mismatch");
  }
}

Matrix class_matrix_checked(const DataMatrix& data, int c, const char* op) {
  Matrix y = data.class_submatrix(c);
  if (y.cols() == 0) {
    throw std::invalid_argument(std::string(op) + ": class " +
                                std::to_string(c) + " has zero samples");
  }
  return y;
}

/// One term of Eq.-5 style gradients: subdiff(T Y) Y^T with the policy
/// resolved against the transformed spectrum.
Matrix surrogate_term(const Matrix& t, const Matrix& y,
                      const DeltaPolicy& delta, std::mt19937_64& rng) {
  const Matrix ty = t * y;
  const double d = delta.resolve(spectral_norm(ty));
  return norm_subdifferential(ty, d, rng) * y.transpose();
}

struct LoopResult {
  Matrix t;
  LearnTrace trace;
};

template <class Objective, class Gradient>
LoopResult descend(Index dim, const LearnConfig& cfg, Objective objective,
                   Gradient gradient, std::mt19937_64 rng) {
  LoopResult out;
  out.t = Matrix::Identity(dim, dim);  // unit spectral norm already

  const bool track = cfg.record_trace || cfg.backtracking;
  double obj = track ? objective(out.t) : 0.0;
  if (cfg.record_trace) out.trace.objective_values.push_back(obj);

  double nu = cfg.step_size;
  int increase_streak = 0;
  const double sign = cfg.literal_plus_update ? 1.0 : -1.0;
  for (int it = 0; it < cfg.iterations; ++it) {
    out.t += sign * nu * gradient(out.t, rng);
    const double norm = spectral_norm(out.t);
    if (norm <= 0 || !out.t.allFinite()) {
      throw std::runtime_error("learning diverged: transform not normalizable");
    }
    out.t /= norm;
    if (track) {
      const double next = objective(out.t);
      if (cfg.record_trace) out.trace.objective_values.push_back(next);
      if (cfg.backtracking) {
        increase_streak = next > obj ? increase_streak + 1 : 0;
        if (increase_streak >= 5) {
          nu *= 0.5;
          increase_streak = 0;
        }
      }
      obj = next;
    }
  }
  out.trace.final_objective = track ? obj : objective(out.t);
  if (cfg.record_trace && out.trace.objective_values.empty()) {
    out.trace.objective_values.push_back(out.trace.final_objective);
  }
  return out;
}

}  // namespace

void LearnConfig::validate() const {
  if (lambda < 0) {
    throw std::invalid_argument("LearnConfig: lambda must be >= 0");
  }
  if (step_size <= 0) {
    throw std::invalid_argument("LearnConfig: step size must be > 0");
  }
  if (iterations < 0) {
    throw std::invalid_argument("LearnConfig: iterations must be >= 0");
  }
  if (delta.value <= 0) {
    throw std::invalid_argument("LearnConfig: delta must be > 0");
  }
}

double class_objective(const Matrix& t, const Matrix& y_class,
                       const Matrix& y_rest, double lambda) {
  require_shapes(t, y_class, "class_objective");
  require_shapes(t, y_rest, "class_objective");
  double obj = nuclear_norm(t * y_class);
  if (lambda != 0 && y_rest.cols() > 0) {
    obj -= lambda * nuclear_norm(t * y_rest);
  }
  return obj;
}

double global_objective(const Matrix& t, const DataMatrix& data,
                        double lambda) {
  const int n = data.num_classes();
  if (n < 1) throw std::invalid_argument("global_objective: no classes");
  double sum = 0;
  for (int c = 0; c < n; ++c) {
    sum += nuclear_norm(t * class_matrix_checked(data, c, "global_objective"));
  }
  double obj = sum / n;
  if (lambda != 0) obj -= lambda * nuclear_norm(t * data.samples);
  return obj;
}

Matrix class_gradient(const Matrix& t, const Matrix& y_class,
                      const Matrix& y_rest, double lambda,
                      const DeltaPolicy& delta, std::mt19937_64& rng) {
  require_shapes(t, y_class, "class_gradient");
  require_shapes(t, y_rest, "class_gradient");
  Matrix g = surrogate_term(t, y_class, delta, rng);
  if (lambda != 0 && y_rest.cols() > 0) {
    g -= lambda * surrogate_term(t, y_rest, delta, rng);
  }
  return g;
}

Matrix global_gradient(const Matrix& t, const DataMatrix& data, double lambda,
                       const DeltaPolicy& delta, std::mt19937_64& rng) {
  const int n = data.num_classes();
  if (n < 1) throw std::invalid_argument("global_gradient: no classes");
  Matrix g = Matrix::Zero(t.rows(), t.cols());
  for (int c = 0; c < n; ++c) {
    g += surrogate_term(t, class_matrix_checked(data, c, "global_gradient"),
                        delta, rng);
  }
  g /= n;
  if (lambda != 0) g -= lambda * surrogate_term(t, data.samples, delta, rng);
  return g;
}

ClassLearnResult learn_class_transforms(const DataMatrix& train,
                                        const LearnConfig& cfg) {
  cfg.validate();
  train.validate();
  const int n = train.num_classes();
  if (n < 2) {
    throw std::invalid_argument(
        "learn_class_transforms: need at least two classes");
  }
  ClassLearnResult out;
  out.transforms.resize(n);
  out.traces.resize(n);
  parallel_for(
      static_cast<size_t>(n),
      [&](size_t ci) {
        const int c = static_cast<int>(ci);
        const Matrix yi =
            class_matrix_checked(train, c, "learn_class_transforms");
        const Matrix rest = train.complement(c);
        auto result = descend(
            train.dim(), cfg,
            [&](const Matrix& t) {
              return class_objective(t, yi, rest, cfg.lambda);
            },
            [&](const Matrix& t, std::mt19937_64& rng) {
              return class_gradient(t, yi, rest, cfg.lambda, cfg.delta, rng);
            },
            make_rng(cfg.seed, "learner/class", static_cast<std::uint64_t>(c)));
        out.transforms[ci] =
            Transform{std::move(result.t), TransformKind::PerClass, c};
        out.traces[ci] = std::move(result.trace);
      },
      cfg.threads);
  return out;
}

std::pair<Transform, LearnTrace> learn_global_transform(
    const DataMatrix& train, const LearnConfig& cfg) {
  cfg.validate();
  train.validate();
  const int n = train.num_classes();
  if (n < 1) {
    throw std::invalid_argument("learn_global_transform: no classes");
  }
  if (n == 1 && cfg.lambda != 0) {
    // With a single class Y equals Y_1 and the discrimination term cancels
    // the representation term; only lambda = 0 is meaningful.
    throw std::invalid_argument(
        "learn_global_transform: single-class data requires lambda = 0");
  }
  auto result = descend(
      train.dim(), cfg,
      [&](const Matrix& t) { return global_objective(t, train, cfg.lambda); },
      [&](const Matrix& t, std::mt19937_64& rng) {
        return global_gradient(t, train, cfg.lambda, cfg.delta, rng);
      },
      make_rng(cfg.seed, "learner/global"));
  return {Transform{std::move(result.t), TransformKind::Global, -1},
          std::move(result.trace)};
}

}  // namespace lrt
