#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace oracle {

SvdTriplet jacobi_svd(const Matrix& a, int max_sweeps) {
  if (a.rows() < a.cols()) {
    throw std::invalid_argument("jacobi_svd oracle expects m >= n");
  }
  const Index n = a.cols();
  Matrix w = a;                       // columns converge to u_i * sigma_i
  Matrix v = Matrix::Identity(n, n);  // accumulated rotations

  const double tol = 1e-14;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (Index p = 0; p < n - 1; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double alpha = w.col(p).squaredNorm();
        const double beta = w.col(q).squaredNorm();
        const double gamma = w.col(p).dot(w.col(q));
        if (std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        // Rutishauser rotation zeroing the (p,q) inner product.
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (Index i = 0; i < w.rows(); ++i) {
          const double wp = w(i, p);
          w(i, p) = c * wp - s * w(i, q);
          w(i, q) = s * wp + c * w(i, q);
        }
        for (Index i = 0; i < n; ++i) {
          const double vp = v(i, p);
          v(i, p) = c * vp - s * v(i, q);
          v(i, q) = s * vp + c * v(i, q);
        }
      }
    }
    if (!rotated) break;
  }

  SvdTriplet out;
  out.sigma.resize(n);
  out.u.resize(a.rows(), n);
  std::vector<Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Vector norms(n);
  for (Index j = 0; j < n; ++j) norms(j) = w.col(j).norm();
  std::sort(order.begin(), order.end(),
            [&](Index x, Index y) { return norms(x) > norms(y); });
  out.v.resize(n, n);
  for (Index j = 0; j < n; ++j) {
    const Index src = order[static_cast<size_t>(j)];
    out.sigma(j) = norms(src);
    out.v.col(j) = v.col(src);
    out.u.col(j) = out.sigma(j) > 0 ? Vector(w.col(src) / out.sigma(j))
                                    : Vector(Vector::Zero(a.rows()));
  }
  return out;
}

double power_iteration_norm(const Matrix& a, int iterations,
                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Vector v(a.cols());
  for (Index i = 0; i < v.size(); ++i) v(i) = gauss(rng);
  v.normalize();
  double sigma = 0;
  for (int it = 0; it < iterations; ++it) {
    Vector next = a.transpose() * (a * v);
    const double norm = next.norm();
    if (norm == 0) return 0;
    next /= norm;
    const double estimate = (a * next).norm();
    if (it > 10 && std::abs(estimate - sigma) <= 1e-14 * estimate) {
      return estimate;
    }
    sigma = estimate;
    v = next;
  }
  return sigma;
}

double jacobi_nuclear_norm(const Matrix& a) {
  const Matrix tall = a.rows() >= a.cols() ? a : Matrix(a.transpose());
  return jacobi_svd(tall).sigma.sum();
}

double central_difference(const std::function<double(const Matrix&)>& f,
                          const Matrix& at, const Matrix& direction,
                          double eps) {
  return (f(at + eps * direction) - f(at - eps * direction)) / (2.0 * eps);
}

std::vector<double> bilinear_resize(const std::vector<double>& src, int src_w,
                                    int src_h, int dst_w, int dst_h) {
  std::vector<double> dst(static_cast<size_t>(dst_w) * dst_h);
  auto sample = [&](long x, long y) {
    x = std::clamp<long>(x, 0, src_w - 1);
    y = std::clamp<long>(y, 0, src_h - 1);
    return src[static_cast<size_t>(y) * src_w + static_cast<size_t>(x)];
  };
  for (int y = 0; y < dst_h; ++y) {
    for (int x = 0; x < dst_w; ++x) {
      const double fx = (x + 0.5) * (static_cast<double>(src_w) / dst_w) - 0.5;
      const double fy = (y + 0.5) * (static_cast<double>(src_h) / dst_h) - 0.5;
      const long x0 = static_cast<long>(std::floor(fx));
      const long y0 = static_cast<long>(std::floor(fy));
      const double dx = fx - x0;
      const double dy = fy - y0;
      dst[static_cast<size_t>(y) * dst_w + static_cast<size_t>(x)] =
          (1 - dy) * ((1 - dx) * sample(x0, y0) + dx * sample(x0 + 1, y0)) +
          dy * ((1 - dx) * sample(x0, y0 + 1) + dx * sample(x0 + 1, y0 + 1));
    }
  }
  return dst;
}

int brute_force_nn(const Matrix& gallery, const std::vector<int>& labels,
                   const Vector& probe) {
  // Per-class best distance, then the lowest class index among minima.
  const int n_classes =
      1 + *std::max_element(labels.begin(), labels.end());
  std::vector<double> best(static_cast<size_t>(n_classes),
                           std::numeric_limits<double>::infinity());
  for (Index k = 0; k < gallery.cols(); ++k) {
    const double d = (gallery.col(k) - probe).norm();
    auto& slot = best[static_cast<size_t>(labels[static_cast<size_t>(k)])];
    slot = std::min(slot, d);
  }
  int label = 0;
  for (int c = 1; c < n_classes; ++c) {
    if (best[static_cast<size_t>(c)] < best[static_cast<size_t>(label)]) {
      label = c;
    }
  }
  return label;
}

Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = gauss(rng);
  }
  return m;
}

Matrix random_rank_r(Index rows, Index cols, Index r, std::mt19937_64& rng) {
  return random_matrix(rows, r, rng) * random_matrix(r, cols, rng);
}

}  // namespace oracle
