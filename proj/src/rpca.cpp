#include "lrt/rpca.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lrt {

void RpcaConfig::validate() const {
  if (beta && *beta <= 0) {
    throw std::invalid_argument("RpcaConfig: beta must be positive");
  }
  if (tol <= 0) throw std::invalid_argument("RpcaConfig: tol must be positive");
  if (max_iter < 1) {
    throw std::invalid_argument("RpcaConfig: max_iter must be >= 1");
  }
}

double RpcaConfig::resolve_beta(Index rows, Index cols) const {
  return beta ? *beta : 1.0 / std::sqrt(static_cast<double>(std::max(rows, cols)));
}

RpcaResult rpca_decompose(const Matrix& m, const RpcaConfig& cfg) {
  detail::require_finite(m, "rpca_decompose");
  cfg.validate();

  RpcaResult out;
  out.L = Matrix::Zero(m.rows(), m.cols());
  out.S = Matrix::Zero(m.rows(), m.cols());

  const double norm_f = m.norm();
  if (norm_f == 0) {
    out.converged = true;
    return out;
  }
  const double beta = cfg.resolve_beta(m.rows(), m.cols());
  const double norm_2 = spectral_norm(m);
  const double norm_inf = m.cwiseAbs().maxCoeff();

  // Standard inexact-ALM initialization: dual scaled so both terms of the
  // Lagrangian start balanced.
  const double j = std::max(norm_2, norm_inf / beta);
  Matrix y = m / j;
  double mu = 1.25 / norm_2;
  const double mu_cap = mu * 1e7;
  // Penalty growth 1.2: faster schedules (1.5+) can freeze the iterates at a
  // non-optimal point on planted low-rank-plus-sparse instances.
  const double rho = 1.2;

  Matrix s_prev = out.S;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    // L-step: singular value thresholding of M - S + Y/mu.
    Eigen::BDCSVD<Matrix> dec(m - out.S + y / mu,
                              Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector sv = (dec.singularValues().array() - 1.0 / mu).max(0.0);
    const Index rank = (sv.array() > 0).count();
    out.L.noalias() = dec.matrixU().leftCols(rank) *
                      sv.head(rank).asDiagonal() *
                      dec.matrixV().leftCols(rank).transpose();

    // S-step: entrywise soft thresholding of M - L + Y/mu.
    const Matrix g = m - out.L + y / mu;
    const double thr = beta / mu;
    out.S = g.array().sign() * (g.array().abs() - thr).max(0.0);

    const Matrix z = m - out.L - out.S;
    y += mu * z;

    out.iterations_used = it;
    out.residual = z.norm() / norm_f;
    // The constraint residual alone can dip below tol while the iterates are
    // still moving; also require the sparse part to have settled.
    const double drift = mu * (out.S - s_prev).norm() / norm_f;
    if (out.residual <= cfg.tol && drift <= 10 * cfg.tol) {
      out.converged = true;
      break;
    }
    s_prev = out.S;
    mu = std::min(rho * mu, mu_cap);
  }
  return out;
}

}  // namespace lrt
