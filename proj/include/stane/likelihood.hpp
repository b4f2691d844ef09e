#pragma once

// Bernoulli-logit likelihood of the STANE model
//   Theta^(t) = Z Z^T + U^(g_t) diag(v_t) U^(g_t)^T
// summed over ordered off-diagonal, observed pairs.

#include "stane/types.hpp"

#include <algorithm>
#include <cmath>

namespace stane {

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// log(1 + e^x) without overflow.
inline double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

/// A^(t) - sigma(Theta^(t)) with diagonal and masked entries set to zero.
using ResidualSlice = Matrix;

inline Matrix shared_gram(const Matrix& z) {
  Matrix s(z.rows(), z.rows());
  s.noalias() = z * z.transpose();
  return s;
}

inline Matrix dynamic_part(const Matrix& u, const Vector& v) {
  Matrix d(u.rows(), u.rows());
  if (u.cols() == 0) {
    d.setZero();
    return d;
  }
  d.noalias() = (u * v.asDiagonal()) * u.transpose();
  return d;
}

/// Theta = S + U diag(v) U^T for a precomputed S = Z Z^T.
inline Matrix theta_from(const Matrix& s, const Matrix& u, const Vector& v) {
  Matrix theta = s;
  if (u.cols() > 0) theta.noalias() += (u * v.asDiagonal()) * u.transpose();
  return theta;
}

inline Matrix assemble_theta(const ModelParams& p, std::size_t t) {
  return theta_from(shared_gram(p.z), p.u_at(t), p.v.at(t));
}

// The slice kernels below read only the strict upper triangle of A, W and
// Theta, which are symmetric; ordered-pair sums are twice the upper sums.

/// Sum over weighted ordered pairs i != j of A*Theta - log(1 + e^Theta).
inline double slice_loglik(const Matrix& a, const Matrix& w, const Matrix& theta) {
  const Eigen::Index n = theta.rows();
  Eigen::ArrayXd inv(n);
  double ll = 0.0;
  for (Eigen::Index j = 1; j < n; ++j) {
    const auto th = theta.col(j).head(j).array();
    auto iv = inv.head(j);
    iv = (1.0 + (-th.abs()).exp()).inverse();
    ll += (w.col(j).head(j).array() * (a.col(j).head(j).array() * th - th.max(0.0) + iv.log())).sum();
  }
  return 2.0 * ll;
}

/// Log-likelihood and residual of one slice in a single pass.
struct SliceEval {
  double loglik = 0.0;
  ResidualSlice residual;
};

inline SliceEval evaluate_slice(const Matrix& a, const Matrix& w, const Matrix& theta) {
  const Eigen::Index n = theta.rows();
  SliceEval out;
  out.residual.resize(n, n);
  Eigen::ArrayXd inv(n);
  double ll = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto th = theta.col(j).head(j).array();
    const auto ww = w.col(j).head(j).array();
    const auto aa = a.col(j).head(j).array();
    auto iv = inv.head(j);
    iv = (1.0 + (-th.abs()).exp()).inverse();
    ll += (ww * (aa * th - th.max(0.0) + iv.log())).sum();
    // sigma(x) = e^{min(x,0)} / (1 + e^{-|x|})
    out.residual.col(j).head(j).array() = ww * (aa - iv * th.min(0.0).exp());
    out.residual(j, j) = 0.0;
  }
  out.residual.triangularView<Eigen::StrictlyLower>() = out.residual.transpose();
  out.loglik = 2.0 * ll;
  return out;
}

inline ResidualSlice residual_from_theta(const Matrix& a, const Matrix& w, const Matrix& theta) {
  return evaluate_slice(a, w, theta).residual;
}

/// Negative log-likelihood l_1 (or l_2 for per-time parameters).
inline double neg_log_lik(const AdjacencyTensor& a, const ModelParams& p) {
  const Matrix s = shared_gram(p.z);
  double total = 0.0;
  for (std::size_t t = 0; t < a.n_times(); ++t)
    total += slice_loglik(a.slice(t), a.weight(t), theta_from(s, p.u_at(t), p.v[t]));
  return -total;
}

inline ResidualSlice residual(const AdjacencyTensor& a, const ModelParams& p, std::size_t t) {
  return residual_from_theta(a.slice(t), a.weight(t), assemble_theta(p, t));
}

/// Log-likelihood of slice t when it is assigned to group k (1-based).
inline double per_slice_loglik(const AdjacencyTensor& a, const ModelParams& p, std::size_t t,
                               int k) {
  if (k < 1 || static_cast<std::size_t>(k) > p.u.size())
    throw ConfigError("candidate group out of range");
  const Matrix theta = theta_from(shared_gram(p.z), p.u[static_cast<std::size_t>(k - 1)], p.v.at(t));
  return slice_loglik(a.slice(t), a.weight(t), theta);
}

/// Gradients of neg_log_lik with respect to Z, each U^(k) and each v_t.
struct Gradients {
  Matrix z;
  std::vector<Matrix> u;
  std::vector<Vector> v;
};

inline Gradients gradients(const AdjacencyTensor& a, const ModelParams& p) {
  const Matrix s = shared_gram(p.z);
  Gradients g;
  g.z = Matrix::Zero(p.z.rows(), p.z.cols());
  g.u.assign(p.u.size(), Matrix::Zero(p.z.rows(), p.r_d()));
  g.v.resize(p.v.size());
  Matrix rsum = Matrix::Zero(p.z.rows(), p.z.rows());
  for (std::size_t t = 0; t < a.n_times(); ++t) {
    const Matrix& u = p.u_at(t);
    const Matrix r = residual_from_theta(a.slice(t), a.weight(t), theta_from(s, u, p.v[t]));
    rsum += r;
    g.u[p.groups.group_of(t)].noalias() -= 2.0 * (r * u) * p.v[t].asDiagonal();
    g.v[t] = -(u.transpose() * r * u).diagonal();
  }
  g.z.noalias() = -2.0 * rsum * p.z;
  return g;
}

}  // namespace stane
