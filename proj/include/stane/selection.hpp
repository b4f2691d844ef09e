#pragma once

// BIC-based model selection: (R_S, R_D) first with one group per time point,
// then (K, mu) with the dimensions fixed.

#include "stane/init.hpp"
#include "stane/likelihood.hpp"
#include "stane/optimizer.hpp"
#include "stane/types.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace stane {

inline double bic1(double nll, std::size_t n, std::size_t t, int r_s, int r_d) {
  const double dn = static_cast<double>(n), dt = static_cast<double>(t);
  return nll + std::log(dn * dn * dt) * ((r_s + dt * r_d) * dn + dt * r_d);
}

inline double bic2(double nll, std::size_t n, std::size_t t, const std::vector<std::size_t>& h_counts,
                   double c0) {
  const double dn = static_cast<double>(n), dt = static_cast<double>(t);
  const double h = static_cast<double>(std::accumulate(h_counts.begin(), h_counts.end(), std::size_t{0}));
  return nll + c0 * std::log(dn * dn * dt) * h;
}

/// 10-point log-spaced grid on [0.01, 1], optionally preceded by 0.
inline std::vector<double> default_mu_grid(bool include_zero) {
  std::vector<double> g;
  if (include_zero) g.push_back(0.0);
  for (int i = 0; i < 10; ++i) g.push_back(0.01 * std::pow(100.0, i / 9.0));
  return g;
}

struct SelectionGrid {
  std::vector<int> r_s_candidates;
  std::vector<int> r_d_candidates;
  std::vector<int> k_candidates;
  std::vector<double> mu_candidates;

  /// R_S, R_D in 1..6, K in 1..min(8, T), mu = 0 plus a 10-point log grid
  /// on [0.01, 1].
  static SelectionGrid defaults(std::size_t t) {
    SelectionGrid g;
    for (int r = 1; r <= 6; ++r) {
      g.r_s_candidates.push_back(r);
      g.r_d_candidates.push_back(r);
    }
    for (int k = 1; k <= static_cast<int>(std::min<std::size_t>(8, t)); ++k) g.k_candidates.push_back(k);
    g.mu_candidates = default_mu_grid(true);
    return g;
  }

  void validate(std::size_t t) const {
    if (r_s_candidates.empty() || r_d_candidates.empty() || k_candidates.empty() || mu_candidates.empty())
      throw ConfigError("selection grid lists must be non-empty");
    for (int k : k_candidates)
      if (k < 1 || static_cast<std::size_t>(k) > t) throw ConfigError("K candidates must lie in 1..T");
    for (double mu : mu_candidates)
      if (!(mu >= 0.0)) throw ConfigError("mu candidates must be non-negative");
    for (int r : r_s_candidates)
      if (r < 0) throw ConfigError("R_S candidates must be non-negative");
    for (int r : r_d_candidates)
      if (r < 0) throw ConfigError("R_D candidates must be non-negative");
  }
};

struct DimensionScore {
  int r_s = 0, r_d = 0;
  double nll = 0.0, bic = 0.0;
  bool ok = false;
};

struct GroupScore {
  int k = 0;
  double mu = 0.0;
  double nll = 0.0, bic = 0.0;
  std::size_t nonzero_rows = 0;
  bool ok = false;
};

struct SelectionResult {
  int r_s = 0, r_d = 0, k = 0;
  double mu = 0.0;
  FitResult best_fit;
  std::vector<DimensionScore> stage1;
  std::vector<GroupScore> stage2;
  std::vector<std::string> warnings;
};

struct MuSelection {
  double mu = 0.0;
  FitResult best_fit;
  std::vector<GroupScore> scores;
  std::vector<std::string> warnings;
};

/// Fits every mu in `mus` from the same `init` (the remaining settings from
/// `cfg`) and keeps the BIC_2 minimizer; ties go to fewer nonzero rows, then
/// to the earlier grid point.
inline MuSelection select_mu(const AdjacencyTensor& a, const ModelParams& init,
                             const std::vector<double>& mus, const FitConfig& cfg) {
  if (mus.empty()) throw ConfigError("mu grid must be non-empty");
  MuSelection out;
  double best_bic = std::numeric_limits<double>::infinity();
  std::size_t best_rows = std::numeric_limits<std::size_t>::max();
  bool found = false;
  for (double mu : mus) {
    GroupScore sc{static_cast<int>(init.n_groups()), mu};
    try {
      FitConfig c = cfg;
      c.mu = mu;
      FitResult fr = fit(a, init, c);
      const auto h = nonzero_row_counts(fr.params);
      sc.nonzero_rows = std::accumulate(h.begin(), h.end(), std::size_t{0});
      sc.nll = neg_log_lik(a, fr.params);
      sc.bic = bic2(sc.nll, a.n_nodes(), a.n_times(), h, cfg.c0);
      sc.ok = std::isfinite(sc.bic);
      if (sc.ok && (sc.bic < best_bic || (sc.bic == best_bic && sc.nonzero_rows < best_rows))) {
        best_bic = sc.bic;
        best_rows = sc.nonzero_rows;
        out.mu = mu;
        out.best_fit = std::move(fr);
        found = true;
      }
    } catch (const std::exception& e) {
      out.warnings.push_back("mu=" + std::to_string(mu) + " skipped: " + e.what());
    }
    out.scores.push_back(sc);
  }
  if (!found) throw NumericalError("every mu grid point failed");
  return out;
}

/// Stage 1 fits the simplified model (settings `prefit_cfg`) for every
/// (R_S, R_D) and keeps the BIC_1 minimizer; stage 2 starts every (K, mu) fit
/// (settings `cfg`) from the stage-1 fit of the chosen dimensions and keeps
/// the BIC_2 minimizer. Ties go to the smaller complexity, then to the earlier
/// grid point. Failing grid points are skipped with a warning.
inline SelectionResult select_model(const AdjacencyTensor& a, const SelectionGrid& grid,
                                    const FitConfig& prefit_cfg, const FitConfig& cfg) {
  grid.validate(a.n_times());
  SelectionResult out;
  std::optional<SimplifiedFit> best_simplified;
  double best_bic = std::numeric_limits<double>::infinity();
  long best_complexity = std::numeric_limits<long>::max();
  FitConfig base = prefit_cfg;
  base.mu = 0.0;
  for (int rs : grid.r_s_candidates) {
    for (int rd : grid.r_d_candidates) {
      DimensionScore sc{rs, rd};
      try {
        SimplifiedFit sf = fit_simplified(a, rs, rd, base);
        sc.nll = neg_log_lik(a, sf.result.params);
        sc.bic = bic1(sc.nll, a.n_nodes(), a.n_times(), rs, rd);
        sc.ok = std::isfinite(sc.bic);
        const long complexity = rs + static_cast<long>(a.n_times()) * rd;
        if (sc.ok && (sc.bic < best_bic || (sc.bic == best_bic && complexity < best_complexity))) {
          best_bic = sc.bic;
          best_complexity = complexity;
          out.r_s = rs;
          out.r_d = rd;
          best_simplified = std::move(sf);
        }
      } catch (const std::exception& e) {
        out.warnings.push_back("stage 1 (r_s=" + std::to_string(rs) + ", r_d=" + std::to_string(rd) +
                               ") skipped: " + e.what());
      }
      out.stage1.push_back(sc);
    }
  }
  if (!best_simplified) throw NumericalError("model selection: every stage-1 grid point failed");

  best_bic = std::numeric_limits<double>::infinity();
  best_complexity = std::numeric_limits<long>::max();
  bool found = false;
  for (int k : grid.k_candidates) {
    GroupLabels labels;
    try {
      labels = kmeans_labels(a, k, cfg.seed);
    } catch (const std::exception& e) {
      out.warnings.push_back("stage 2 (k=" + std::to_string(k) + ") skipped: " + e.what());
      continue;
    }
    const ModelParams init = build_init(best_simplified->params, labels);
    MuSelection ms;
    try {
      ms = select_mu(a, init, grid.mu_candidates, cfg);
    } catch (const std::exception& e) {
      out.warnings.push_back("stage 2 (k=" + std::to_string(k) + ") skipped: " + e.what());
      continue;
    }
    for (auto& w : ms.warnings) out.warnings.push_back("stage 2 (k=" + std::to_string(k) + ") " + w);
    for (const GroupScore& sc : ms.scores) {
      out.stage2.push_back(sc);
      if (!sc.ok) continue;
      const long complexity = static_cast<long>(sc.nonzero_rows);
      if (sc.bic < best_bic || (sc.bic == best_bic && complexity < best_complexity)) {
        best_bic = sc.bic;
        best_complexity = complexity;
        out.k = k;
        out.mu = sc.mu;
        found = true;
        if (sc.mu == ms.mu) out.best_fit = ms.best_fit;
      }
    }
  }
  if (!found) throw NumericalError("model selection: every stage-2 grid point failed");
  return out;
}

}  // namespace stane
