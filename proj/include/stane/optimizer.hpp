#pragma once

// Projected gradient descent for STANE and its sparse (MCP-penalized)
// extension. The simplified per-time model runs through the same loop with
// K = T, g_t = t and reassignment disabled.

#include "stane/likelihood.hpp"
#include "stane/types.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace stane {

/// Rows with L2 norm at or below this count as zero.
inline constexpr double kZeroRowTol = 1e-10;

struct StepSizes {
  double eta_z = 0.0;
  double eta_u = 0.0;
  double eta_v = 0.0;

  /// eta_Z = eta/||Z0||_2^2, eta_U = eta/||U0^(1)||_2^2,
  /// eta_V = eta/(N T ||U0^(1)||_2^2).
  static StepSizes from(const ModelParams& init, double eta) {
    auto spectral_sq = [](const Matrix& m) {
      if (m.cols() == 0 || m.rows() == 0) return 0.0;
      Eigen::SelfAdjointEigenSolver<Matrix> es(m.transpose() * m, Eigen::EigenvaluesOnly);
      return es.eigenvalues().maxCoeff();
    };
    const double n = static_cast<double>(init.n_nodes());
    const double t = static_cast<double>(init.n_times());
    double zs = spectral_sq(init.z);
    double us = init.u.empty() ? 0.0 : spectral_sq(init.u.front());
    if (!(zs > 0.0)) zs = 1.0;
    if (!(us > 0.0)) us = n;
    return {eta / zs, eta / us, eta / (n * t * us)};
  }
};

struct Projection {
  Matrix u;
  Matrix m_factor;  // (U^T U / N)^{1/2}; u_in = u * m_factor
};

/// U <- sqrt(N) U (U^T U)^{-1/2}. Zero rows stay zero, so the Gram identity
/// U^T U = N I holds over the support. An all-zero input is returned as is.
inline Projection project_orthonormal(const Matrix& u) {
  const Eigen::Index rd = u.cols();
  const double n = static_cast<double>(u.rows());
  if (rd == 0) return {u, Matrix(0, 0)};
  if (u.isZero(0.0)) return {u, Matrix::Identity(rd, rd)};
  const Matrix gram = (u.transpose() * u) / n;
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  const Vector lam = es.eigenvalues();
  if (!(lam.minCoeff() > 1e-12 * std::max(1.0, lam.maxCoeff())))
    throw NumericalError("rank-deficient U^T U in projection (collapsed dynamic dimension)");
  const Matrix& q = es.eigenvectors();
  const Vector root = lam.cwiseSqrt();
  Projection out;
  out.m_factor = q * root.asDiagonal() * q.transpose();
  out.u = u * (q * root.cwiseInverse().asDiagonal() * q.transpose());
  return out;
}

/// Diagonal of m diag(v) m, the V scaling that offsets a projection.
inline Vector compensate_v(const Vector& v, const Matrix& m) {
  if (v.size() == 0) return v;
  return (m * v.asDiagonal() * m).diagonal();
}

/// MCP rho(t) = mu * int_0^t (1 - x/(mu gamma))_+ dx.
inline double mcp_penalty(double t, double mu, double gamma) {
  if (mu <= 0.0) return 0.0;
  if (t < mu * gamma) return mu * t - t * t / (2.0 * gamma);
  return 0.5 * mu * mu * gamma;
}

inline Vector mcp_row_threshold(const Vector& row, double mu, double gamma) {
  const double nrm = row.norm();
  if (nrm >= mu * gamma) return row;
  if (nrm <= mu) return Vector::Zero(row.size());
  return ((1.0 - mu / nrm) / (1.0 - 1.0 / gamma)) * row;
}

inline void threshold_rows(Matrix& u, double mu, double gamma) {
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    const double nrm = u.row(i).norm();
    if (nrm >= mu * gamma) continue;
    if (nrm <= mu)
      u.row(i).setZero();
    else
      u.row(i) *= (1.0 - mu / nrm) / (1.0 - 1.0 / gamma);
  }
}

inline std::size_t nonzero_rows(const Matrix& u) {
  std::size_t h = 0;
  for (Eigen::Index i = 0; i < u.rows(); ++i)
    if (u.row(i).norm() > kZeroRowTol) ++h;
  return h;
}

inline std::vector<std::size_t> nonzero_row_counts(const ModelParams& p) {
  std::vector<std::size_t> h;
  h.reserve(p.u.size());
  for (const Matrix& uk : p.u) h.push_back(nonzero_rows(uk));
  return h;
}

inline double total_penalty(const ModelParams& p, double mu, double gamma) {
  if (mu <= 0.0) return 0.0;
  double s = 0.0;
  for (const Matrix& uk : p.u)
    for (Eigen::Index i = 0; i < uk.rows(); ++i) s += mcp_penalty(uk.row(i).norm(), mu, gamma);
  return s;
}

/// Q = l_1 / N^2 + sum_k sum_i rho(||U^(k)_i||).
inline double penalized_objective(const AdjacencyTensor& a, const ModelParams& p,
                                  const FitConfig& cfg) {
  const double n = static_cast<double>(a.n_nodes());
  return neg_log_lik(a, p) / (n * n) + total_penalty(p, cfg.mu, cfg.gamma);
}

/// g_t = argmax_k per-slice log-likelihood, ties to the smallest k.
inline GroupLabels reassign_groups(const AdjacencyTensor& a, const ModelParams& p) {
  const Matrix s = shared_gram(p.z);
  std::vector<int> labels(a.n_times(), 1);
  for (std::size_t t = 0; t < a.n_times(); ++t) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < p.u.size(); ++k) {
      const double ll = slice_loglik(a.slice(t), a.weight(t), theta_from(s, p.u[k], p.v[t]));
      if (ll > best) {
        best = ll;
        labels[t] = static_cast<int>(k) + 1;
      }
    }
  }
  return GroupLabels(std::move(labels), static_cast<int>(p.u.size()));
}

/// ||sum_t D^(t)||_F; zero under the centering condition, never enforced.
inline double centering_diagnostic(const ModelParams& p) {
  const auto n = static_cast<Eigen::Index>(p.n_nodes());
  Matrix acc = Matrix::Zero(n, n);
  for (std::size_t t = 0; t < p.n_times(); ++t) acc += dynamic_part(p.u_at(t), p.v[t]);
  return acc.norm();
}

struct FitResult {
  ModelParams params;
  std::vector<double> objective_trace;  // entry 0 is the objective at init
  std::vector<double> slice_loglik;     // per-slice log-likelihood at the end
  int n_iter = 0;
  bool converged = false;
  bool penalty_active = false;
  bool restarted = false;
  double eta_used = 0.0;
};

struct IterationState {
  int iter = 0;
  const ModelParams& params;
  double objective = 0.0;
};

using IterationObserver = std::function<void(const IterationState&)>;

namespace detail {

struct Evaluated {
  std::vector<SliceEval> slices;
  double objective = 0.0;
};

inline double objective_of(const std::vector<SliceEval>& ev, const ModelParams& p, double n,
                           const FitConfig& cfg) {
  double ll = 0.0;
  for (const auto& e : ev) ll += e.loglik;
  return -ll / (n * n) + total_penalty(p, cfg.mu, cfg.gamma);
}

// Evaluate every slice under the current labels, optionally reassigning first.
inline std::vector<SliceEval> evaluate_all(const AdjacencyTensor& a, ModelParams& p,
                                           bool reassign) {
  const Matrix s = shared_gram(p.z);
  std::vector<SliceEval> ev(a.n_times());
  for (std::size_t t = 0; t < a.n_times(); ++t) {
    if (!reassign || p.u.size() == 1) {
      ev[t] = evaluate_slice(a.slice(t), a.weight(t), theta_from(s, p.u_at(t), p.v[t]));
      continue;
    }
    // the current group needs the full evaluation anyway; other candidates
    // only need the log-likelihood
    const std::size_t cur = p.groups.group_of(t);
    ev[t] = evaluate_slice(a.slice(t), a.weight(t), theta_from(s, p.u[cur], p.v[t]));
    std::size_t best_k = cur;
    double best = ev[t].loglik;
    for (std::size_t k = 0; k < p.u.size(); ++k) {
      if (k == cur) continue;
      const double ll = slice_loglik(a.slice(t), a.weight(t), theta_from(s, p.u[k], p.v[t]));
      if (ll > best || (ll == best && k < best_k)) {
        best = ll;
        best_k = k;
      }
    }
    if (best_k != cur)
      ev[t] = evaluate_slice(a.slice(t), a.weight(t), theta_from(s, p.u[best_k], p.v[t]));
    p.groups.labels[t] = static_cast<int>(best_k) + 1;
  }
  return ev;
}

inline bool run_pgd(const AdjacencyTensor& a, const ModelParams& init, const FitConfig& cfg,
                    double eta, const IterationObserver& observer, FitResult& out) {
  const double n = static_cast<double>(a.n_nodes());
  const StepSizes step = StepSizes::from(init, eta);
  const bool penalized = cfg.mu > 0.0;

  ModelParams p = init;
  std::vector<SliceEval> ev = evaluate_all(a, p, false);
  double q = objective_of(ev, p, n, cfg);
  out = FitResult{};
  out.eta_used = eta;
  out.penalty_active = penalized;
  out.objective_trace.push_back(q);
  if (!std::isfinite(q)) return false;

  const std::size_t kk = p.u.size();
  for (int m = 0; m < cfg.max_iter; ++m) {
    Matrix rsum = ev.front().residual;
    for (std::size_t t = 1; t < ev.size(); ++t) rsum += ev[t].residual;

    ModelParams next = p;
    next.z.noalias() += 2.0 * step.eta_z * rsum * p.z;

    std::vector<Matrix> m_factor(kk, Matrix::Identity(p.r_d(), p.r_d()));
    if (p.r_d() > 0) {
      std::vector<Matrix> grad(kk);
      std::vector<bool> used(kk, false);
      for (std::size_t t = 0; t < ev.size(); ++t) {
        const std::size_t k = p.groups.group_of(t);
        if (!used[k]) {
          grad[k] = Matrix::Zero(p.u[k].rows(), p.u[k].cols());
          used[k] = true;
        }
        grad[k].noalias() += (ev[t].residual * p.u[k]) * p.v[t].asDiagonal();
      }
      for (std::size_t k = 0; k < kk; ++k) {
        if (!used[k]) continue;  // empty group: frozen
        Matrix uk = p.u[k] + 2.0 * step.eta_u * grad[k];
        if (penalized) threshold_rows(uk, cfg.mu, cfg.gamma);
        if (!uk.allFinite()) return false;
        Projection pr;
        try {
          pr = project_orthonormal(uk);
        } catch (const NumericalError&) {
          return false;  // collapsed dimension: treated like divergence
        }
        next.u[k] = std::move(pr.u);
        m_factor[k] = std::move(pr.m_factor);
      }
      for (std::size_t t = 0; t < ev.size(); ++t) {
        const std::size_t k = p.groups.group_of(t);
        const Matrix& uk = p.u[k];
        Vector vt = p.v[t] + step.eta_v * (uk.transpose() * ev[t].residual * uk).diagonal();
        next.v[t] = compensate_v(vt, m_factor[k]);
      }
    }

    ev = evaluate_all(a, next, cfg.reassign);
    const double q_next = objective_of(ev, next, n, cfg);
    p = std::move(next);
    out.objective_trace.push_back(q_next);
    out.n_iter = m + 1;
    if (!std::isfinite(q_next)) return false;
    if (observer) observer(IterationState{m + 1, p, q_next});
    const double rel = std::abs(q_next - q) / (std::abs(q) + 1e-12);
    q = q_next;
    if (rel < cfg.tol) {
      out.converged = true;
      break;
    }
  }
  out.params = std::move(p);
  out.slice_loglik.resize(ev.size());
  for (std::size_t t = 0; t < ev.size(); ++t) out.slice_loglik[t] = ev[t].loglik;
  return true;
}

}  // namespace detail

/// Fit by projected gradient descent from `init`. A run whose objective turns
/// non-finite or whose U^(k) loses rank restarts once from `init` with eta/5;
/// a second failure throws.
inline FitResult fit(const AdjacencyTensor& a, const ModelParams& init, const FitConfig& cfg,
                     const IterationObserver& observer = {}) {
  cfg.validate();
  init.validate();
  if (init.n_nodes() != a.n_nodes() || init.n_times() != a.n_times())
    throw ConfigError("initial parameters do not match tensor dimensions");
  FitResult res;
  if (detail::run_pgd(a, init, cfg, cfg.eta, observer, res)) return res;
  FitResult retry;
  if (detail::run_pgd(a, init, cfg, cfg.eta / 5.0, observer, retry)) {
    retry.restarted = true;
    return retry;
  }
  throw NumericalError("fit diverged (non-finite objective or collapsed U) after step-size restart");
}

}  // namespace stane
