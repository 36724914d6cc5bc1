#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lrt/linalg.hpp"
#include "support/oracles.hpp"

#include <cmath>

using lrt::Index;
using lrt::Matrix;
using lrt::Vector;

namespace {

Matrix reconstruct(const lrt::SvdResult& r) {
  const Index k = r.singular_values.size();
  return r.U.leftCols(k) * r.singular_values.asDiagonal() *
         r.V.leftCols(k).transpose();
}

}  // namespace

TEST_CASE("svd of identity and diagonal matrices") {
  const auto id = lrt::svd(Matrix::Identity(3, 3));
  CHECK(id.singular_values.size() == 3);
  for (Index i = 0; i < 3; ++i) CHECK(id.singular_values(i) == doctest::Approx(1.0));

  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 3, 2, 1;
  const auto r = lrt::svd(d);
  CHECK(r.singular_values(0) == doctest::Approx(3.0));
  CHECK(r.singular_values(1) == doctest::Approx(2.0));
  CHECK(r.singular_values(2) == doctest::Approx(1.0));
  // U and V equal the identity up to per-column signs.
  for (Index j = 0; j < 3; ++j) {
    CHECK(std::abs(r.U.col(j).cwiseAbs().maxCoeff() - 1.0) < 1e-12);
    CHECK(std::abs(r.U(j, j) * r.V(j, j)) == doctest::Approx(1.0));
  }
}

TEST_CASE("svd reconstructs and matches the Jacobi oracle") {
  auto rng = lrt::make_rng(11, "test");
  const Matrix a = oracle::random_matrix(5, 4, rng);
  const auto r = lrt::svd(a);
  CHECK((reconstruct(r) - a).norm() <= 1e-10 * a.norm());

  const auto ref = oracle::jacobi_svd(a);
  for (Index i = 0; i < 4; ++i) {
    CHECK(r.singular_values(i) == doctest::Approx(ref.sigma(i)).epsilon(1e-10));
  }
}

TEST_CASE("svd invariants on random shapes") {
  auto rng = lrt::make_rng(7, "test");
  for (auto [m, n] : {std::pair<Index, Index>{8, 8}, {12, 5}, {5, 12}, {30, 17}}) {
    const Matrix a = oracle::random_matrix(m, n, rng);
    for (auto mode : {lrt::SvdMode::Thin, lrt::SvdMode::Full}) {
      const auto r = lrt::svd(a, mode);
      CHECK((r.U.transpose() * r.U - Matrix::Identity(r.U.cols(), r.U.cols()))
                .cwiseAbs()
                .maxCoeff() <= 1e-10);
      CHECK((r.V.transpose() * r.V - Matrix::Identity(r.V.cols(), r.V.cols()))
                .cwiseAbs()
                .maxCoeff() <= 1e-10);
      for (Index i = 0; i + 1 < r.singular_values.size(); ++i) {
        CHECK(r.singular_values(i) >= r.singular_values(i + 1));
      }
      CHECK(r.singular_values.minCoeff() >= 0.0);
      CHECK((reconstruct(r) - a).norm() <= 1e-10 * a.norm());
    }
  }
}

TEST_CASE("svd rejects non-finite input") {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = std::nan("");
  CHECK_THROWS_AS(lrt::svd(a), std::invalid_argument);
  CHECK_THROWS_AS(lrt::nuclear_norm(a), std::invalid_argument);
  CHECK_THROWS_AS(lrt::spectral_norm(a), std::invalid_argument);
}

TEST_CASE("nuclear norm basics") {
  CHECK(lrt::nuclear_norm(Matrix::Zero(4, 4)) == 0.0);
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 3, 2, 1;
  CHECK(lrt::nuclear_norm(d) == doctest::Approx(6.0));

  auto rng = lrt::make_rng(3, "test");
  const Matrix a = oracle::random_matrix(6, 5, rng);
  CHECK(std::abs(lrt::nuclear_norm(a) - oracle::jacobi_nuclear_norm(a)) <=
        1e-9);
}

TEST_CASE("nuclear norm absolute homogeneity") {
  auto rng = lrt::make_rng(4, "test");
  std::uniform_real_distribution<double> scale(-3.0, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = oracle::random_matrix(7, 4, rng);
    const double c = scale(rng);
    const double lhs = lrt::nuclear_norm(c * a);
    const double rhs = std::abs(c) * lrt::nuclear_norm(a);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, rhs));
  }
}

TEST_CASE("spectral norm basics") {
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 3, 2, 1;
  CHECK(lrt::spectral_norm(d) == doctest::Approx(3.0));

  auto rng = lrt::make_rng(5, "test");
  Vector u = oracle::random_matrix(6, 1, rng);
  Vector v = oracle::random_matrix(4, 1, rng);
  u.normalize();
  v.normalize();
  CHECK(lrt::spectral_norm(u * v.transpose()) == doctest::Approx(1.0));

  const Matrix a = oracle::random_matrix(5, 7, rng);
  CHECK(std::abs(lrt::spectral_norm(a) - oracle::power_iteration_norm(a)) <=
        1e-8);
}

TEST_CASE("numerical rank") {
  CHECK(lrt::numerical_rank(Matrix::Identity(3, 3), 0.5) == 3);
  CHECK(lrt::numerical_rank(Matrix::Zero(4, 6), 1e-12) == 0);
  CHECK_THROWS_AS(lrt::numerical_rank(Matrix::Identity(2, 2), 0.0),
                  std::invalid_argument);

  auto rng = lrt::make_rng(6, "test");
  Matrix a = oracle::random_rank_r(10, 8, 2, rng);
  a += 1e-9 * oracle::random_matrix(10, 8, rng);
  CHECK(lrt::numerical_rank(a, 1e-6) == 2);
}

TEST_CASE("norm inequality over planted ranks") {
  auto rng = lrt::make_rng(8, "test");
  std::uniform_int_distribution<Index> dim(2, 20);
  for (int trial = 0; trial < 200; ++trial) {
    const Index m = dim(rng);
    const Index n = dim(rng);
    std::uniform_int_distribution<Index> rank_dist(1, std::min(m, n));
    const Index r = rank_dist(rng);
    const Matrix a = oracle::random_rank_r(m, n, r, rng);
    const double spec = lrt::spectral_norm(a);
    const double nuc = lrt::nuclear_norm(a);
    CHECK(spec <= nuc + 1e-10);
    CHECK(nuc <= static_cast<double>(r) * spec + 1e-10 * std::max(1.0, nuc));
  }
}

TEST_CASE("subdifferential deterministic branch: all singular values kept") {
  auto rng = lrt::make_rng(9, "test");
  const Matrix a = oracle::random_matrix(6, 4, rng);
  const double delta = 1e-8;  // generic gaussian stays well above
  auto sub_rng = lrt::make_rng(9, "subdiff");
  const Matrix g = lrt::norm_subdifferential(a, delta, sub_rng);

  const auto ref = oracle::jacobi_svd(a);
  const Matrix expected = ref.u * ref.v.transpose();
  CHECK((g - expected).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK((g.transpose() * a).trace() ==
        doctest::Approx(lrt::nuclear_norm(a)).epsilon(1e-10));
}

TEST_CASE("subdifferential of the zero matrix has unit spectral norm") {
  auto rng = lrt::make_rng(10, "subdiff");
  const Matrix g = lrt::norm_subdifferential(Matrix::Zero(5, 3), 1e-3, rng);
  CHECK(lrt::spectral_norm(g) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("subdifferential with a rank-deficient partition") {
  auto rng = lrt::make_rng(12, "test");
  // two singular values forced (numerically) to zero
  const Matrix a = oracle::random_rank_r(6, 4, 2, rng);
  const double delta = 1e-6 * lrt::spectral_norm(a);
  auto sub_rng = lrt::make_rng(12, "subdiff");
  const Matrix g = lrt::norm_subdifferential(a, delta, sub_rng);

  CHECK(lrt::spectral_norm(g) <= 1.0 + 1e-8);
  CHECK((g.transpose() * a).trace() >=
        lrt::nuclear_norm(a) - 4 * delta);

  // Closed-form nuclear-norm subdifferential characterization from the
  // oracle SVD: G = U1 V1^T + W with U1^T W = 0, W V1 = 0, ||W|| <= 1.
  const auto ref = oracle::jacobi_svd(a);
  const Matrix u1 = ref.u.leftCols(2);
  const Matrix v1 = ref.v.leftCols(2);
  const Matrix w = g - u1 * v1.transpose();
  CHECK((u1.transpose() * w).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK((w * v1).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(lrt::spectral_norm(w) <= 1.0 + 1e-8);
}

TEST_CASE("subdifferential handles wide matrices by transposition") {
  auto rng = lrt::make_rng(13, "test");
  const Matrix a = oracle::random_rank_r(4, 7, 2, rng);
  const double delta = 1e-6 * lrt::spectral_norm(a);
  auto sub_rng = lrt::make_rng(13, "subdiff");
  const Matrix g = lrt::norm_subdifferential(a, delta, sub_rng);
  CHECK(g.rows() == 4);
  CHECK(g.cols() == 7);
  CHECK(lrt::spectral_norm(g) <= 1.0 + 1e-8);
  CHECK((g.transpose() * a).trace() >= lrt::nuclear_norm(a) - 4 * delta);
}

TEST_CASE("subdifferential validity across random matrices and policies") {
  auto rng = lrt::make_rng(14, "test");
  std::uniform_int_distribution<Index> dim(2, 15);
  for (int trial = 0; trial < 100; ++trial) {
    const Index m = dim(rng);
    const Index n = dim(rng);
    std::uniform_int_distribution<Index> rank_dist(1, std::min(m, n));
    const bool deficient = trial % 2 == 0;
    const Matrix a = deficient
                         ? oracle::random_rank_r(m, n, rank_dist(rng), rng)
                         : oracle::random_matrix(m, n, rng);
    const lrt::DeltaPolicy policy{trial % 3 == 1
                                      ? lrt::DeltaPolicy::Kind::Absolute
                                      : lrt::DeltaPolicy::Kind::Relative,
                                  trial % 3 == 2 ? 1e-2 : 1e-4};
    const double delta = policy.resolve(lrt::spectral_norm(a));
    const Matrix g = lrt::norm_subdifferential(a, delta, rng);
    CHECK(lrt::spectral_norm(g) <= 1.0 + 1e-8);
    CHECK((g.transpose() * a).trace() >=
          lrt::nuclear_norm(a) - static_cast<double>(std::min(m, n)) * delta);
  }
}

TEST_CASE("subdifferential is deterministic given the rng state") {
  auto rng = lrt::make_rng(15, "test");
  const Matrix a = oracle::random_rank_r(8, 5, 2, rng);
  const double delta = 1e-6 * lrt::spectral_norm(a);
  auto rng1 = lrt::make_rng(42, "subdiff");
  auto rng2 = lrt::make_rng(42, "subdiff");
  const Matrix g1 = lrt::norm_subdifferential(a, delta, rng1);
  const Matrix g2 = lrt::norm_subdifferential(a, delta, rng2);
  CHECK((g1.array() == g2.array()).all());
}

TEST_CASE("subdifferential rejects bad delta") {
  auto rng = lrt::make_rng(16, "subdiff");
  CHECK_THROWS_AS(lrt::norm_subdifferential(Matrix::Identity(3, 3), 0.0, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(lrt::norm_subdifferential(Matrix::Identity(3, 3), -1.0, rng),
                  std::invalid_argument);
}

TEST_CASE("svd round trip up to 400x400") {
  auto rng = lrt::make_rng(17, "test");
  const Matrix a = oracle::random_matrix(400, 400, rng);
  const auto r = lrt::svd(a);
  CHECK((reconstruct(r) - a).norm() <= 1e-10 * a.norm());
}

TEST_CASE("rank_at counts thresholded singular values") {
  Matrix d = Matrix::Zero(4, 4);
  d.diagonal() << 5, 1, 0.5, 1e-9;
  const auto r = lrt::svd(d);
  CHECK(r.rank_at(0.75) == 2);
  CHECK(r.rank_at(1e-6) == 3);
  CHECK_THROWS_AS(r.rank_at(0.0), std::invalid_argument);
}
