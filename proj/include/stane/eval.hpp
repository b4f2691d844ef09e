#pragma once

// Estimation-error metrics, group alignment, NMI, support recovery, hold-out
// masking and link-prediction scores.

#include "stane/likelihood.hpp"
#include "stane/optimizer.hpp"
#include "stane/random.hpp"
#include "stane/simulate.hpp"
#include "stane/types.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace stane {

struct MetricError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline double z_error(const Matrix& z_hat, const Matrix& z_true) {
  if (z_hat.rows() != z_true.rows()) throw MetricError("z_error: node count mismatch");
  const Matrix g = z_true * z_true.transpose();
  const double den = g.squaredNorm();
  if (den == 0.0) throw MetricError("z_error: zero reference Gram matrix");
  return (g - z_hat * z_hat.transpose()).squaredNorm() / den;
}

/// Minimum-cost perfect assignment on a square cost matrix (Hungarian method).
/// Returns col[row].
inline std::vector<int> hungarian(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) col[p[j] - 1] = j - 1;
  return col;
}

/// For each true group, the estimated group (0-based) with maximal total
/// overlap under a one-to-one matching; -1 when there are fewer estimated
/// groups than true ones and the group is left unmatched.
inline std::vector<int> align_groups(const GroupLabels& est, const GroupLabels& truth) {
  if (est.size() != truth.size()) throw MetricError("align_groups: length mismatch");
  const int kt = truth.n_groups, ke = est.n_groups;
  const int n = std::max(kt, ke);
  Matrix cost = Matrix::Zero(n, n);
  for (std::size_t t = 0; t < truth.size(); ++t)
    cost(static_cast<Eigen::Index>(truth.group_of(t)), static_cast<Eigen::Index>(est.group_of(t))) -= 1.0;
  std::vector<int> col = hungarian(cost);
  std::vector<int> out(static_cast<std::size_t>(kt));
  for (int k = 0; k < kt; ++k) out[static_cast<std::size_t>(k)] = col[static_cast<std::size_t>(k)] < ke ? col[static_cast<std::size_t>(k)] : -1;
  return out;
}

/// sum ||U* U*^T - U^ U^^T||_F^2 / sum ||U* U*^T||_F^2 over aligned pairs.
inline double u_error(const std::vector<Matrix>& u_hats, const std::vector<Matrix>& u_trues) {
  if (u_hats.size() != u_trues.size()) throw MetricError("u_error: list length mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < u_trues.size(); ++k) {
    const Matrix g = u_trues[k] * u_trues[k].transpose();
    den += g.squaredNorm();
    num += (g - u_hats[k] * u_hats[k].transpose()).squaredNorm();
  }
  if (den == 0.0) throw MetricError("u_error: zero reference");
  return num / den;
}

/// Group-level U.error when the group counts agree (after alignment),
/// otherwise the per-time comparison U^(g^_t) vs U*^(g*_t).
inline double u_error(const ModelParams& est, const ModelParams& truth) {
  std::vector<Matrix> hats, trues;
  if (est.n_groups() == truth.n_groups()) {
    const auto map = align_groups(est.groups, truth.groups);
    for (std::size_t k = 0; k < truth.n_groups(); ++k) {
      trues.push_back(truth.u[k]);
      hats.push_back(est.u[static_cast<std::size_t>(map[k])]);
    }
  } else {
    for (std::size_t t = 0; t < truth.n_times(); ++t) {
      trues.push_back(truth.u_at(t));
      hats.push_back(est.u_at(t));
    }
  }
  return u_error(hats, trues);
}

inline double p_error(const std::vector<Matrix>& p_hats, const std::vector<Matrix>& p_trues) {
  if (p_hats.size() != p_trues.size()) throw MetricError("p_error: slice count mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t t = 0; t < p_trues.size(); ++t) {
    num += (p_trues[t] - p_hats[t]).squaredNorm();
    den += p_trues[t].squaredNorm();
  }
  if (den == 0.0) throw MetricError("p_error: zero reference");
  return num / den;
}

/// argmin over orthogonal O of ||v_hat - v_true O||_F.
inline Matrix procrustes(const Matrix& v_hat, const Matrix& v_true) {
  Eigen::JacobiSVD<Matrix> svd(v_true.transpose() * v_hat, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

inline double v_error(const std::vector<Vector>& v_hats, const std::vector<Vector>& v_trues) {
  if (v_hats.size() != v_trues.size()) throw MetricError("v_error: slice count mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t t = 0; t < v_trues.size(); ++t) {
    const Matrix vh = v_hats[t].asDiagonal();
    const Matrix vs = v_trues[t].asDiagonal();
    const Matrix o = procrustes(vh, vs);
    num += (vh - vs * o).squaredNorm();
    den += vs.squaredNorm();
  }
  if (den == 0.0) throw MetricError("v_error: zero reference");
  return num / den;
}

/// I(a;b) / sqrt(H(a) H(b)), natural log; 1 when both are single-cluster.
/// Partitions equal up to relabeling return exactly 1.
inline double nmi(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw MetricError("nmi: length mismatch");
  if (a.empty()) throw MetricError("nmi: empty partitions");
  const double n = static_cast<double>(a.size());
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> ca, cb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1.0;
    ca[a[i]] += 1.0;
    cb[b[i]] += 1.0;
  }
  auto entropy = [n](const std::map<int, double>& c) {
    double h = 0.0;
    for (const auto& [_, x] : c) h -= (x / n) * std::log(x / n);
    return h;
  };
  const double ha = entropy(ca), hb = entropy(cb);
  if (joint.size() == ca.size() && joint.size() == cb.size()) return 1.0;
  if (ha <= 0.0 || hb <= 0.0) return 0.0;
  double mi = 0.0;
  for (const auto& [key, x] : joint)
    mi += (x / n) * std::log(x * n / (ca[key.first] * cb[key.second]));
  return std::clamp(mi / std::sqrt(ha * hb), 0.0, 1.0);
}

inline double nmi(const GroupLabels& a, const GroupLabels& b) { return nmi(a.labels, b.labels); }

struct SupportRates {
  double tpr = 0.0;
  double fpr = 0.0;
};

/// Rows with norm > kZeroRowTol form the estimated support; TPR/FPR are
/// pooled over all (group, row) cells.
inline SupportRates support_rates(const std::vector<Matrix>& u_hats,
                                  const std::vector<std::vector<bool>>& true_supports) {
  if (u_hats.size() != true_supports.size()) throw MetricError("support_rates: size mismatch");
  double tp = 0, pos = 0, fp = 0, neg = 0;
  for (std::size_t k = 0; k < u_hats.size(); ++k) {
    for (Eigen::Index i = 0; i < u_hats[k].rows(); ++i) {
      const bool est = u_hats[k].row(i).norm() > kZeroRowTol;
      if (true_supports[k][static_cast<std::size_t>(i)]) {
        pos += 1;
        tp += est ? 1 : 0;
      } else {
        neg += 1;
        fp += est ? 1 : 0;
      }
    }
  }
  if (pos == 0) throw MetricError("support_rates: empty true support");
  return {tp / pos, neg > 0 ? fp / neg : 0.0};
}

inline std::vector<bool> row_support(const Matrix& u) {
  std::vector<bool> s(static_cast<std::size_t>(u.rows()));
  for (Eigen::Index i = 0; i < u.rows(); ++i) s[static_cast<std::size_t>(i)] = u.row(i).norm() > kZeroRowTol;
  return s;
}

/// Same alignment rule as u_error(ModelParams, ModelParams).
inline SupportRates support_rates(const ModelParams& est, const ModelParams& truth) {
  std::vector<Matrix> hats;
  std::vector<std::vector<bool>> sup;
  if (est.n_groups() == truth.n_groups()) {
    const auto map = align_groups(est.groups, truth.groups);
    for (std::size_t k = 0; k < truth.n_groups(); ++k) {
      hats.push_back(est.u[static_cast<std::size_t>(map[k])]);
      sup.push_back(row_support(truth.u[k]));
    }
  } else {
    for (std::size_t t = 0; t < truth.n_times(); ++t) {
      hats.push_back(est.u_at(t));
      sup.push_back(row_support(truth.u_at(t)));
    }
  }
  return support_rates(hats, sup);
}

using PairList = std::vector<std::pair<std::size_t, std::size_t>>;

struct HoldoutSplit {
  AdjacencyTensor masked;          // training tensor, held-out pairs unobserved
  std::vector<PairList> held_out;  // per slice, unordered pairs (i < j), 0-based
};

/// Per slice, round(fraction * N(N-1)/2) unordered pairs drawn uniformly
/// without replacement and masked symmetrically.
inline HoldoutSplit mask_holdout(const AdjacencyTensor& a, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("hold-out fraction must be in (0,1)");
  const std::size_t n = a.n_nodes();
  const std::size_t npairs = n * (n - 1) / 2;
  const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(npairs)));
  PairList all;
  all.reserve(npairs);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) all.emplace_back(i, j);
  Rng rng = make_rng(seed, 0, Stream::holdout);
  HoldoutSplit out;
  std::vector<Matrix> mask;
  for (std::size_t t = 0; t < a.n_times(); ++t) {
    PairList pool = all;
    // partial Fisher-Yates: first `count` entries are the sample
    for (std::size_t r = 0; r < count; ++r) {
      std::uniform_int_distribution<std::size_t> pick(r, pool.size() - 1);
      std::swap(pool[r], pool[pick(rng)]);
    }
    pool.resize(count);
    std::sort(pool.begin(), pool.end());
    Matrix m = a.has_mask() ? Matrix((*a.mask())[t])
                            : Matrix::Ones(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (auto [i, j] : pool) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 0.0;
      m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = 0.0;
    }
    mask.push_back(std::move(m));
    out.held_out.push_back(std::move(pool));
  }
  out.masked = a.with_mask(std::move(mask));
  return out;
}

/// Mann-Whitney AUC with average ranks for ties.
inline double auroc(const std::vector<double>& scores, const std::vector<int>& labels) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return scores[x] < scores[y]; });
  double pos = 0, rank_sum = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t r = i; r < j; ++r)
      if (labels[idx[r]]) {
        rank_sum += avg;
        pos += 1;
      }
    i = j;
  }
  const double neg = static_cast<double>(n) - pos;
  if (pos == 0 || neg == 0) throw MetricError("auroc undefined: held-out labels are all one class");
  return (rank_sum - pos * (pos + 1) / 2.0) / (pos * neg);
}

/// Average precision: sum over distinct thresholds of (R_i - R_{i-1}) P_i.
inline double aupr(const std::vector<double>& scores, const std::vector<int>& labels) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return scores[x] > scores[y]; });
  double pos = 0;
  for (int l : labels) pos += l ? 1 : 0;
  if (pos == 0) throw MetricError("aupr undefined: no positive held-out pairs");
  double tp = 0, seen = 0, ap = 0, prev_recall = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[idx[j]] == scores[idx[i]]) {
      tp += labels[idx[j]] ? 1 : 0;
      seen += 1;
      ++j;
    }
    const double recall = tp / pos;
    ap += (recall - prev_recall) * (tp / seen);
    prev_recall = recall;
    i = j;
  }
  return ap;
}

struct LinkMetrics {
  double auroc = 0.0;
  double aupr = 0.0;
  double mse = 0.0;
  double logloss = 0.0;
};

inline LinkMetrics link_prediction_metrics(const std::vector<Matrix>& p_hat, const AdjacencyTensor& a_full,
                                           const std::vector<PairList>& held_out) {
  std::vector<double> scores;
  std::vector<int> labels;
  for (std::size_t t = 0; t < held_out.size(); ++t)
    for (auto [i, j] : held_out[t]) {
      scores.push_back(p_hat.at(t)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      labels.push_back(a_full.slice(t)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) != 0.0);
    }
  if (scores.empty()) throw MetricError("empty hold-out set");
  LinkMetrics m;
  m.auroc = auroc(scores, labels);
  m.aupr = aupr(scores, labels);
  double se = 0, ll = 0;
  for (std::size_t r = 0; r < scores.size(); ++r) {
    const double y = labels[r];
    const double p = std::clamp(scores[r], 1e-12, 1.0 - 1e-12);
    se += (y - scores[r]) * (y - scores[r]);
    ll -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
  }
  m.mse = se / static_cast<double>(scores.size());
  m.logloss = ll / static_cast<double>(scores.size());
  return m;
}

struct MetricsReport {
  double z_error = 0.0;
  double u_error = 0.0;
  double v_error = 0.0;
  double p_error = 0.0;
  double nmi = 1.0;
  std::optional<double> tpr, fpr;
  std::optional<double> auroc, aupr, mse, logloss;

  /// Fixed CSV column order.
  static std::vector<std::string> columns() {
    return {"z_error", "u_error", "v_error", "p_error", "nmi", "tpr",
            "fpr",     "auroc",   "aupr",    "mse",     "logloss"};
  }
  std::vector<std::optional<double>> values() const {
    return {z_error, u_error, v_error, p_error, nmi, tpr, fpr, auroc, aupr, mse, logloss};
  }
};

/// Six significant digits, '.' decimal separator.
inline std::string format_sig6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

inline std::string csv_header() {
  std::string s;
  for (const auto& c : MetricsReport::columns()) s += (s.empty() ? "" : ",") + c;
  return s;
}

inline std::string csv_row(const MetricsReport& r) {
  std::string s;
  bool first = true;
  for (const auto& v : r.values()) {
    if (!first) s += ",";
    first = false;
    if (v) s += format_sig6(*v);
  }
  return s;
}

/// Estimation metrics of `est` against simulation truth. TPR/FPR are filled
/// when the truth has zero rows.
inline MetricsReport evaluate(const ModelParams& est, const ModelParams& truth) {
  MetricsReport r;
  r.z_error = z_error(est.z, truth.z);
  r.u_error = u_error(est, truth);
  r.v_error = v_error(est.v, truth.v);
  r.p_error = p_error(probabilities(est), probabilities(truth));
  r.nmi = nmi(est.groups, truth.groups);
  bool sparse = false;
  for (const Matrix& uk : truth.u) sparse = sparse || nonzero_rows(uk) < static_cast<std::size_t>(uk.rows());
  if (sparse) {
    const SupportRates s = support_rates(est, truth);
    r.tpr = s.tpr;
    r.fpr = s.fpr;
  }
  return r;
}

}  // namespace stane
