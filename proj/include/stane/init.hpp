#pragma once

// Initial values for STANE: K-means on vectorized slices for the labels and a
// simplified (per-time) pre-fit aggregated to group level for Z, U and V.

#include "stane/likelihood.hpp"
#include "stane/optimizer.hpp"
#include "stane/random.hpp"
#include "stane/simulate.hpp"
#include "stane/types.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace stane {

/// Per-time fit of Theta^(t) = Z Z^T + U^(t) V^(t) U^(t)^T.
struct SimplifiedParams {
  Matrix z;
  std::vector<Matrix> u_per_time;
  std::vector<Vector> v_per_time;

  /// As ModelParams with K = T and g_t = t.
  ModelParams as_model() const {
    ModelParams p;
    p.z = z;
    p.u = u_per_time;
    p.v = v_per_time;
    p.groups = GroupLabels::identity(v_per_time.size());
    return p;
  }
  static SimplifiedParams from_model(const ModelParams& p) {
    SimplifiedParams sp;
    sp.z = p.z;
    sp.v_per_time = p.v;
    for (std::size_t t = 0; t < p.n_times(); ++t) sp.u_per_time.push_back(p.u_at(t));
    return sp;
  }
};

namespace detail {

// Upper-triangular entries of each slice; masked entries take the observed
// density of their slice.
inline Matrix slice_features(const AdjacencyTensor& a) {
  const auto n = static_cast<Eigen::Index>(a.n_nodes());
  const Eigen::Index len = n * (n - 1) / 2;
  Matrix x(len, static_cast<Eigen::Index>(a.n_times()));
  for (std::size_t t = 0; t < a.n_times(); ++t) {
    const Matrix& s = a.slice(t);
    const Matrix& w = a.weight(t);
    const double wsum = w.sum();
    const double density = wsum > 0.0 ? (w.array() * s.array()).sum() / wsum : 0.0;
    Eigen::Index r = 0;
    for (Eigen::Index j = 1; j < n; ++j)
      for (Eigen::Index i = 0; i < j; ++i, ++r)
        x(r, static_cast<Eigen::Index>(t)) = w(i, j) != 0.0 ? s(i, j) : density;
  }
  return x;
}

struct KMeansRun {
  std::vector<int> assign;
  double wcss = std::numeric_limits<double>::infinity();
};

// Lloyd iterations from a k-means++ seeding; columns of x are points.
inline KMeansRun kmeans_once(const Matrix& x, int k, Rng& rng) {
  const Eigen::Index npts = x.cols();
  std::vector<Eigen::Index> centers_idx;
  std::uniform_int_distribution<Eigen::Index> first(0, npts - 1);
  centers_idx.push_back(first(rng));
  Vector d2 = (x.colwise() - x.col(centers_idx[0])).colwise().squaredNorm().transpose();
  while (static_cast<int>(centers_idx.size()) < k) {
    const double total = d2.sum();
    Eigen::Index next = 0;
    if (total <= 0.0) {
      // all remaining points coincide with a center; take the first unused index
      for (Eigen::Index i = 0; i < npts; ++i)
        if (std::find(centers_idx.begin(), centers_idx.end(), i) == centers_idx.end()) {
          next = i;
          break;
        }
    } else {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng), acc = 0.0;
      next = npts - 1;
      for (Eigen::Index i = 0; i < npts; ++i) {
        acc += d2(i);
        if (acc >= target && d2(i) > 0.0) {
          next = i;
          break;
        }
      }
    }
    centers_idx.push_back(next);
    d2 = d2.cwiseMin((x.colwise() - x.col(next)).colwise().squaredNorm().transpose());
  }
  Matrix centers(x.rows(), k);
  for (int c = 0; c < k; ++c) centers.col(c) = x.col(centers_idx[static_cast<std::size_t>(c)]);

  KMeansRun run;
  run.assign.assign(static_cast<std::size_t>(npts), -1);
  for (int iter = 0; iter < 300; ++iter) {
    bool changed = false;
    run.wcss = 0.0;
    for (Eigen::Index i = 0; i < npts; ++i) {
      int best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (x.col(i) - centers.col(c)).squaredNorm();
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      run.wcss += bd;
      if (run.assign[static_cast<std::size_t>(i)] != best) {
        run.assign[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    if (!changed) break;
    Matrix sums = Matrix::Zero(x.rows(), k);
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < npts; ++i) {
      const int c = run.assign[static_cast<std::size_t>(i)];
      sums.col(c) += x.col(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < k; ++c)
      if (counts[static_cast<std::size_t>(c)] > 0)
        centers.col(c) = sums.col(c) / counts[static_cast<std::size_t>(c)];
  }
  return run;
}

}  // namespace detail

/// Relabel so that groups are numbered by first appearance in time.
inline GroupLabels relabel_by_first_occurrence(const std::vector<int>& raw, int k) {
  std::vector<int> map(static_cast<std::size_t>(*std::max_element(raw.begin(), raw.end()) + 1), 0);
  int next = 1;
  std::vector<int> out(raw.size());
  for (std::size_t t = 0; t < raw.size(); ++t) {
    int& m = map[static_cast<std::size_t>(raw[t])];
    if (m == 0) m = next++;
    out[t] = m;
  }
  return GroupLabels(std::move(out), k);
}

/// Best of 10 k-means++ restarts by within-cluster sum of squares.
inline GroupLabels kmeans_labels(const AdjacencyTensor& a, int k, std::uint64_t seed) {
  if (k < 1) throw ConfigError("k must be positive");
  if (static_cast<std::size_t>(k) > a.n_times()) throw ConfigError("k exceeds number of slices");
  if (k == 1) return GroupLabels::constant(a.n_times(), 1);
  const Matrix x = detail::slice_features(a);
  Rng rng = make_rng(seed, 0, Stream::kmeans);
  detail::KMeansRun best;
  for (int restart = 0; restart < 10; ++restart) {
    detail::KMeansRun run = detail::kmeans_once(x, k, rng);
    if (run.wcss < best.wcss) best = std::move(run);
  }
  return relabel_by_first_occurrence(best.assign, k);
}

/// Random starting point: Z ~ N(0,1), U ~ Unif(0.3,0.8) projected,
/// diag(V) ~ Unif(2.5,3).
inline ModelParams random_simplified_start(std::size_t n, std::size_t t, int r_s, int r_d,
                                           std::uint64_t seed) {
  Rng rng = make_rng(seed, 0, Stream::init);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> vdist(2.5, 3.0);
  ModelParams p;
  p.z.resize(static_cast<Eigen::Index>(n), r_s);
  for (Eigen::Index j = 0; j < p.z.cols(); ++j)
    for (Eigen::Index i = 0; i < p.z.rows(); ++i) p.z(i, j) = normal(rng);
  for (std::size_t s = 0; s < t; ++s) p.u.push_back(random_group_embedding(n, r_d, 0, rng));
  p.v.resize(t);
  for (auto& vt : p.v) {
    vt.resize(r_d);
    for (Eigen::Index r = 0; r < vt.size(); ++r) vt(r) = vdist(rng);
  }
  p.groups = GroupLabels::identity(t);
  return p;
}

struct SimplifiedFit {
  SimplifiedParams params;
  FitResult result;
};

/// Simplified-model fit from a seeded random start (K = T, g_t = t fixed).
/// With cfg.mu > 0 this is the sparse simplified variant.
inline SimplifiedFit fit_simplified(const AdjacencyTensor& a, int r_s, int r_d,
                                    const FitConfig& cfg) {
  if (r_s < 0 || r_d < 0 || static_cast<std::size_t>(r_s + r_d) > a.n_nodes())
    throw ConfigError("infeasible latent dimensions");
  ModelParams start = random_simplified_start(a.n_nodes(), a.n_times(), r_s, r_d, cfg.seed);
  FitConfig c = cfg;
  c.reassign = false;
  SimplifiedFit out;
  out.result = fit(a, start, c);
  out.params = SimplifiedParams::from_model(out.result.params);
  return out;
}

/// Group-level start from a simplified fit: U^(k) from the top-|eigenvalue|
/// eigenvectors of the group-mean dynamic part, V^(t) by least squares under
/// U^T U = N I.
inline ModelParams build_init(const SimplifiedParams& sp, const GroupLabels& labels) {
  const std::size_t tt = sp.v_per_time.size();
  if (labels.size() != tt) throw ConfigError("labels do not match simplified fit");
  const auto n = sp.z.rows();
  const Eigen::Index rd = sp.u_per_time.empty() ? 0 : sp.u_per_time.front().cols();
  const double dn = static_cast<double>(n);

  std::vector<Matrix> d(tt);
  Matrix global = Matrix::Zero(n, n);
  for (std::size_t t = 0; t < tt; ++t) {
    d[t] = dynamic_part(sp.u_per_time[t], sp.v_per_time[t]);
    global += d[t];
  }
  global /= static_cast<double>(tt);

  ModelParams p;
  p.z = sp.z;
  p.groups = labels;
  for (int k = 0; k < labels.n_groups; ++k) {
    const auto members = labels.members(static_cast<std::size_t>(k));
    Matrix mean = Matrix::Zero(n, n);
    if (members.empty()) {
      mean = global;
    } else {
      for (std::size_t t : members) mean += d[t];
      mean /= static_cast<double>(members.size());
    }
    Matrix uk(n, rd);
    if (rd > 0) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(mean);
      const Vector lam = es.eigenvalues();
      std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
      std::iota(order.begin(), order.end(), Eigen::Index{0});
      std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
        return std::abs(lam(x)) > std::abs(lam(y));
      });
      for (Eigen::Index r = 0; r < rd; ++r)
        uk.col(r) = std::sqrt(dn) * es.eigenvectors().col(order[static_cast<std::size_t>(r)]);
    }
    p.u.push_back(std::move(uk));
  }
  p.v.resize(tt);
  for (std::size_t t = 0; t < tt; ++t) {
    const Matrix& uk = p.u_at(t);
    p.v[t] = (uk.transpose() * d[t] * uk).diagonal() / (dn * dn);
  }
  p.validate();
  return p;
}

struct InitResult {
  ModelParams params;
  SimplifiedFit simplified;
  GroupLabels kmeans;
};

/// kmeans_labels -> fit_simplified -> build_init, with `prefit_cfg` driving
/// the simplified pre-fit (normally FitConfig::simplified_defaults() plus a
/// seed). The pre-fit is unpenalized; any penalty is applied only by the
/// subsequent group-level fit.
inline InitResult initialize(const AdjacencyTensor& a, int r_s, int r_d, int k,
                             const FitConfig& prefit_cfg) {
  InitResult out;
  out.kmeans = kmeans_labels(a, k, prefit_cfg.seed);
  FitConfig c = prefit_cfg;
  c.mu = 0.0;
  out.simplified = fit_simplified(a, r_s, r_d, c);
  out.params = build_init(out.simplified.params, out.kmeans);
  return out;
}

}  // namespace stane
