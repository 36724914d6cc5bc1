#include "lrt/linalg.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace lrt {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = kFnvOffset;
  for (unsigned char c : s) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

Vector singular_values_only(const Matrix& a) {
  Eigen::BDCSVD<Matrix> dec(a);
  return dec.singularValues();
}

}  // namespace

std::mt19937_64 make_rng(std::uint64_t seed, std::string_view stream,
                         std::uint64_t index) {
  std::uint64_t h = splitmix64(seed ^ fnv1a(stream));
  h = splitmix64(h ^ splitmix64(index));
  return std::mt19937_64(h);
}

namespace detail {

void require_finite(const Matrix& a, const char* op) {
  if (a.rows() < 1 || a.cols() < 1) {
    throw std::invalid_argument(std::string(op) + ": empty matrix");
  }
  if (!a.allFinite()) {
    throw std::invalid_argument(std::string(op) +
                                ": matrix has non-finite entries");
  }
}

}  // namespace detail

Index SvdResult::rank_at(double delta) const {
  if (delta <= 0) {
    throw std::invalid_argument("rank_at: delta must be positive");
  }
  Index r = 0;
  while (r < singular_values.size() && singular_values(r) >= delta) ++r;
  return r;
}

SvdResult svd(const Matrix& a, SvdMode mode) {
  detail::require_finite(a, "svd");
  const unsigned options = mode == SvdMode::Full
                               ? Eigen::ComputeFullU | Eigen::ComputeFullV
                               : Eigen::ComputeThinU | Eigen::ComputeThinV;
  Eigen::BDCSVD<Matrix> dec(a, options);
  return SvdResult{dec.matrixU(), dec.singularValues(), dec.matrixV()};
}

double nuclear_norm(const Matrix& a) {
  detail::require_finite(a, "nuclear_norm");
  return singular_values_only(a).sum();
}

double spectral_norm(const Matrix& a) {
  detail::require_finite(a, "spectral_norm");
  return singular_values_only(a)(0);
}

Index numerical_rank(const Matrix& a, double delta) {
  detail::require_finite(a, "numerical_rank");
  if (delta <= 0) {
    throw std::invalid_argument("numerical_rank: delta must be positive");
  }
  const Vector sv = singular_values_only(a);
  return (sv.array() >= delta).count();
}

double DeltaPolicy::resolve(double sigma_max) const {
  if (value <= 0) {
    throw std::invalid_argument("DeltaPolicy: value must be positive");
  }
  if (kind == Kind::Absolute) return value;
  return sigma_max > 0 ? value * sigma_max : value;
}

Matrix norm_subdifferential(const Matrix& a, double delta,
                            std::mt19937_64& rng) {
  detail::require_finite(a, "norm_subdifferential");
  if (delta <= 0) {
    throw std::invalid_argument(
        "norm_subdifferential: delta must be positive");
  }
  if (a.rows() < a.cols()) {
    // The partition arithmetic assumes m >= n; the subgradient of the
    // transpose transposes.
    return norm_subdifferential(a.transpose(), delta, rng).transpose();
  }

  const Index m = a.rows();
  const Index n = a.cols();
  Eigen::BDCSVD<Matrix> dec(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& sv = dec.singularValues();

  Index s = 0;  // singular values below delta
  for (Index i = 0; i < n; ++i) {
    if (sv(i) < delta) ++s;
  }
  const Index k = n - s;

  Matrix g = Matrix::Zero(m, n);
  if (k > 0) {
    g.noalias() =
        dec.matrixU().leftCols(k) * dec.matrixV().leftCols(k).transpose();
  }
  if (s > 0) {
    Matrix b(m - n + s, s);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (Index j = 0; j < b.cols(); ++j) {
      for (Index i = 0; i < b.rows(); ++i) {
        b(i, j) = gauss(rng);
      }
    }
    const double bnorm = spectral_norm(b);
    if (bnorm > 0) b /= bnorm;
    g.noalias() += dec.matrixU().rightCols(m - n + s) * b *
                   dec.matrixV().rightCols(s).transpose();
  }
  return g;
}

}  // namespace lrt
