#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string_view>

namespace lrt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Generator for a named random stream. All randomness in the toolkit flows
/// from one top-level seed through streams like "learner/global" or
/// "synthetic", so components can be re-seeded independently and per-class
/// work stays deterministic under parallel execution.
std::mt19937_64 make_rng(std::uint64_t seed, std::string_view stream,
                         std::uint64_t index = 0);

struct SvdResult {
  Matrix U;
  Vector singular_values;  // non-increasing, >= 0
  Matrix V;

  /// Number of singular values >= delta.
  Index rank_at(double delta) const;
};

enum class SvdMode { Thin, Full };

/// Dense SVD, A = U * diag(s) * V^T. Thin mode returns min(m,n) columns in
/// U and V; Full mode returns square U (m x m) and V (n x n).
SvdResult svd(const Matrix& a, SvdMode mode = SvdMode::Thin);

/// Sum of singular values.
double nuclear_norm(const Matrix& a);

/// Largest singular value.
double spectral_norm(const Matrix& a);

/// Number of singular values >= delta. Rejects delta <= 0.
Index numerical_rank(const Matrix& a, double delta);

/// Rule mapping a spectrum to the threshold used when splitting singular
/// values into the kept/discarded partitions of norm_subdifferential.
/// Relative thresholds scale with sigma_max so behavior is invariant to the
/// per-iteration normalization of learned transforms.
struct DeltaPolicy {
  enum class Kind { Relative, Absolute };
  Kind kind = Kind::Relative;
  double value = 1e-4;

  double resolve(double sigma_max) const;
};

/// One subgradient of the matrix norm at A, for an m x n input with m >= n:
///
///   G = U1 V1^T + U2 B V2^T
///
/// where the SVD partitions split at singular values < delta (s of them),
/// U1, V1 keep the first n - s columns, B is an (m-n+s) x s standard normal
/// matrix rescaled by its spectral norm. For m < n the subgradient of A^T is
/// computed and transposed. Satisfies spectral_norm(G) <= 1 and
/// trace(G^T A) >= nuclear_norm(A) - min(m,n) * delta.
Matrix norm_subdifferential(const Matrix& a, double delta,
                            std::mt19937_64& rng);

namespace detail {
/// Throws std::invalid_argument when a has NaN/Inf entries or is empty.
void require_finite(const Matrix& a, const char* op);
}  // namespace detail

}  // namespace lrt
