#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lrt/classifier.hpp"
#include "lrt/omp.hpp"
#include "support/oracles.hpp"

#include <cmath>

using lrt::DataMatrix;
using lrt::Index;
using lrt::Matrix;
using lrt::Transform;
using lrt::TransformKind;
using lrt::Vector;

namespace {

DataMatrix gaussian_blobs(Index dim, int classes, Index per_class,
                          double spread, std::uint64_t seed) {
  auto rng = lrt::make_rng(seed, "blobs");
  DataMatrix data;
  data.samples.resize(dim, classes * per_class);
  Index col = 0;
  for (int c = 0; c < classes; ++c) {
    const Vector center = 4.0 * oracle::random_matrix(dim, 1, rng);
    for (Index k = 0; k < per_class; ++k) {
      data.samples.col(col++) =
          center + spread * oracle::random_matrix(dim, 1, rng);
      data.labels.push_back(c);
    }
  }
  return data;
}

Transform global_identity(Index dim) {
  return Transform{Matrix::Identity(dim, dim), TransformKind::Global, -1};
}

std::vector<Transform> per_class_transforms(Index dim, int classes,
                                            std::uint64_t seed) {
  auto rng = lrt::make_rng(seed, "transforms");
  std::vector<Transform> out;
  for (int c = 0; c < classes; ++c) {
    Matrix t = Matrix::Identity(dim, dim) +
               0.3 * oracle::random_matrix(dim, dim, rng) / std::sqrt(double(dim));
    out.push_back(Transform{t / lrt::spectral_norm(t),
                            TransformKind::PerClass, c});
  }
  return out;
}

}  // namespace

TEST_CASE("nn classifies an exact gallery column with score zero") {
  DataMatrix g = gaussian_blobs(6, 3, 4, 0.3, 1);
  const auto p = lrt::nn_classify(g, g.samples.col(5));
  CHECK(p.label == g.labels[5]);
  CHECK(p.score == doctest::Approx(0.0));
  CHECK(p.class_scores.size() == 3);
}

TEST_CASE("nn ties break toward the lower class index") {
  DataMatrix g;
  g.samples.resize(2, 2);
  g.samples.col(0) << 1, 0;   // class 1 listed first
  g.samples.col(1) << -1, 0;  // class 0 equidistant from the origin
  g.labels = {1, 0};
  Vector probe(2);
  probe << 0, 0;
  const auto p = lrt::nn_classify(g, probe);
  CHECK(p.label == 0);
}

TEST_CASE("nn matches the brute-force oracle on random blobs") {
  DataMatrix g = gaussian_blobs(8, 3, 12, 1.5, 2);
  auto rng = lrt::make_rng(3, "probes");
  for (int k = 0; k < 50; ++k) {
    const Vector probe = 4.0 * oracle::random_matrix(8, 1, rng);
    const auto p = lrt::nn_classify(g, probe);
    CHECK(p.label == oracle::brute_force_nn(g.samples, g.labels, probe));
  }
}

TEST_CASE("nn input validation") {
  DataMatrix g = gaussian_blobs(4, 2, 3, 0.1, 4);
  CHECK_THROWS_AS(lrt::nn_classify(g, Vector::Ones(5)),
                  std::invalid_argument);
  DataMatrix empty;
  empty.samples.resize(4, 0);
  CHECK_THROWS_AS(lrt::nn_classify(empty, Vector::Ones(4)),
                  std::invalid_argument);
}

TEST_CASE("identity transform on clean rank-1 classes keeps dictionaries") {
  // incoherent rank-1 classes: sign-vector direction, positive column scales
  auto rng = lrt::make_rng(5, "rank1");
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_real_distribution<double> coeff(0.5, 2.0);
  DataMatrix train;
  train.samples.resize(10, 8);
  Index col = 0;
  for (int c = 0; c < 2; ++c) {
    Vector dir(10);
    for (Index i = 0; i < 10; ++i) dir(i) = coin(rng) ? 1.0 : -1.0;
    for (int k = 0; k < 4; ++k) {
      train.samples.col(col++) = coeff(rng) * dir;
      train.labels.push_back(c);
    }
  }
  const auto model = lrt::build_lowrank_model({global_identity(10)}, train);
  CHECK(model.all_converged());
  CHECK(model.protocol == TransformKind::Global);
  for (int c = 0; c < 2; ++c) {
    const Matrix yi = train.class_submatrix(c);
    CHECK((model.dictionaries[c] - yi).norm() <= 1e-5 * yi.norm());
  }
}

TEST_CASE("model building rejects zero-sample classes and bad transforms") {
  DataMatrix gap;
  gap.samples = Matrix::Identity(4, 4);
  gap.labels = {0, 0, 2, 2};  // class 1 empty
  CHECK_THROWS_AS(lrt::build_lowrank_model({global_identity(4)}, gap),
                  std::invalid_argument);

  DataMatrix ok = gaussian_blobs(4, 3, 3, 0.2, 6);
  auto partial = per_class_transforms(4, 2, 7);  // missing class 2
  CHECK_THROWS_AS(lrt::build_lowrank_model(partial, ok),
                  std::invalid_argument);
}

TEST_CASE("global omp classification finds the spanning class") {
  DataMatrix train = gaussian_blobs(12, 3, 6, 0.4, 8);
  const auto model = lrt::build_lowrank_model({global_identity(12)}, train);
  // probe inside class 1's dictionary span
  const Vector probe = 0.7 * model.dictionaries[1].col(0) +
                       0.3 * model.dictionaries[1].col(2);
  const auto p = lrt::lrt_omp_classify(model, probe, 2);
  CHECK(p.label == 1);
  CHECK(p.score <= 1e-8);
  CHECK_THROWS_AS(lrt::class_lrt_classify(model, probe, 2),
                  std::invalid_argument);
}

TEST_CASE("omp scores equal exact least-squares residuals at full sparsity") {
  DataMatrix train = gaussian_blobs(14, 3, 5, 0.8, 9);
  const auto model = lrt::build_lowrank_model({global_identity(14)}, train);
  auto rng = lrt::make_rng(10, "probe");
  const Vector probe = oracle::random_matrix(14, 1, rng);
  const auto p = lrt::lrt_omp_classify(model, probe, 5);  // s_max = K_i
  for (int c = 0; c < 3; ++c) {
    // normal-equations oracle on the class dictionary
    const Matrix& d = model.dictionaries[c];
    const Vector x = (d.transpose() * d).ldlt().solve(d.transpose() * probe);
    const double residual = (probe - d * x).norm();
    CHECK(p.class_scores[c] == doctest::Approx(residual).epsilon(1e-8));
  }
}

TEST_CASE("per-class omp protocol picks the planted class") {
  const int classes = 3;
  DataMatrix train = gaussian_blobs(10, classes, 6, 0.4, 11);
  const auto transforms = per_class_transforms(10, classes, 12);
  const auto model = lrt::build_lowrank_model(transforms, train);
  CHECK(model.protocol == TransformKind::PerClass);

  // probe whose class-2 transform lands exactly in class 2's dictionary
  // span; at s_max = K_i the OMP residual reaches the exact LS residual 0
  Vector combo = 0.5 * model.dictionaries[2].col(1) +
                 0.5 * model.dictionaries[2].col(3);
  const Matrix& t2 = transforms[2].matrix;
  const Vector probe = t2.colPivHouseholderQr().solve(combo);
  const auto p = lrt::class_lrt_classify(model, probe, 6);
  CHECK(p.label == 2);
  CHECK(p.class_scores[2] <= 1e-8);
  // residual gap against the other classes
  for (int c : {0, 1}) CHECK(p.class_scores[c] > 100 * p.class_scores[2]);
  CHECK_THROWS_AS(lrt::lrt_omp_classify(model, probe, 2),
                  std::invalid_argument);
}

TEST_CASE("single-class model degenerates to that class") {
  DataMatrix train;
  train.samples = Matrix::Identity(5, 3);
  train.labels = {0, 0, 0};
  auto transforms = per_class_transforms(5, 1, 13);
  const auto model = lrt::build_lowrank_model(transforms, train);
  auto rng = lrt::make_rng(14, "probe");
  const auto p =
      lrt::class_lrt_classify(model, oracle::random_matrix(5, 1, rng), 2);
  CHECK(p.label == 0);
}

TEST_CASE("class nn protocol transforms both sides") {
  DataMatrix train = gaussian_blobs(9, 3, 5, 0.5, 15);
  const auto transforms = per_class_transforms(9, 3, 16);
  // probe equal to a class-1 training column scores zero for class 1
  const Vector probe = train.samples.col(7);
  const int truth = train.labels[7];
  const auto p = lrt::class_lrt_nn_classify(train, transforms, probe);
  CHECK(p.label == truth);
  CHECK(p.class_scores[truth] == doctest::Approx(0.0));
}

TEST_CASE("identical per-class transforms reduce to transformed nn") {
  DataMatrix train = gaussian_blobs(7, 3, 6, 1.0, 17);
  auto rng = lrt::make_rng(18, "shared");
  Matrix shared = Matrix::Identity(7, 7) +
                  0.4 * oracle::random_matrix(7, 7, rng) / std::sqrt(7.0);
  std::vector<Transform> transforms;
  for (int c = 0; c < 3; ++c) {
    transforms.push_back(Transform{shared, TransformKind::PerClass, c});
  }
  DataMatrix transformed = train;
  transformed.samples = shared * train.samples;

  for (int k = 0; k < 25; ++k) {
    const Vector probe = 4.0 * oracle::random_matrix(7, 1, rng);
    const auto a = lrt::class_lrt_nn_classify(train, transforms, probe);
    const auto b = lrt::nn_classify(transformed, shared * probe);
    CHECK(a.label == b.label);
  }
}

TEST_CASE("precomputed gallery matches the one-shot api") {
  DataMatrix train = gaussian_blobs(6, 3, 4, 0.6, 19);
  const auto transforms = per_class_transforms(6, 3, 20);
  const auto gallery = lrt::build_class_nn_gallery(train, transforms);
  auto rng = lrt::make_rng(21, "probe");
  for (int k = 0; k < 10; ++k) {
    const Vector probe = oracle::random_matrix(6, 1, rng);
    const auto a = lrt::class_lrt_nn_classify(gallery, probe);
    const auto b = lrt::class_lrt_nn_classify(train, transforms, probe);
    CHECK(a.label == b.label);
    CHECK(a.score == doctest::Approx(b.score));
  }
}

TEST_CASE("raising s_max never raises a residual score") {
  DataMatrix train = gaussian_blobs(10, 3, 6, 0.9, 22);
  const auto model = lrt::build_lowrank_model({global_identity(10)}, train);
  auto rng = lrt::make_rng(23, "probe");
  const Vector probe = oracle::random_matrix(10, 1, rng);
  std::vector<double> prev;
  for (int s = 1; s <= 5; ++s) {
    const auto p = lrt::lrt_omp_classify(model, probe, s);
    if (!prev.empty()) {
      for (size_t c = 0; c < prev.size(); ++c) {
        CHECK(p.class_scores[c] <= prev[c] + 1e-10);
      }
    }
    prev = p.class_scores;
  }
}

TEST_CASE("prediction label is always the argmin of the score vector") {
  DataMatrix train = gaussian_blobs(8, 4, 5, 1.2, 24);
  auto rng = lrt::make_rng(25, "probe");
  for (int k = 0; k < 20; ++k) {
    const Vector probe = 4.0 * oracle::random_matrix(8, 1, rng);
    const auto p = lrt::nn_classify(train, probe);
    double best = p.class_scores[0];
    int arg = 0;
    for (size_t c = 1; c < p.class_scores.size(); ++c) {
      if (p.class_scores[c] < best) {
        best = p.class_scores[c];
        arg = static_cast<int>(c);
      }
    }
    CHECK(p.label == arg);
    CHECK(p.score == doctest::Approx(best));
  }
}

TEST_CASE("evaluate computes accuracy, per-class rates and confusion") {
  CHECK(lrt::evaluate(std::vector<int>{1, 2, 3}, {1, 2, 3}).accuracy ==
        doctest::Approx(100.0));
  CHECK(lrt::evaluate(std::vector<int>{2, 3, 1}, {1, 2, 3}).accuracy ==
        doctest::Approx(0.0));

  // mixed many-class vector against a hand count
  std::vector<int> truth;
  std::vector<int> pred;
  auto rng = lrt::make_rng(26, "eval");
  std::uniform_int_distribution<int> cls(0, 67);
  std::uniform_real_distribution<double> flip(0.0, 1.0);
  int correct = 0;
  for (int k = 0; k < 500; ++k) {
    const int t = cls(rng);
    truth.push_back(t);
    if (flip(rng) < 0.7) {
      pred.push_back(t);
      ++correct;
    } else {
      pred.push_back((t + 1) % 68);
    }
  }
  const auto rep = lrt::evaluate(pred, truth);
  CHECK(rep.correct == correct);
  CHECK(rep.accuracy == doctest::Approx(100.0 * correct / 500.0));
  CHECK(rep.confusion.sum() == 500);

  CHECK_THROWS_AS(lrt::evaluate(std::vector<int>{1}, {1, 2}),
                  std::invalid_argument);
}
