#pragma once

// End-to-end fitting for the four model variants: STANE, Sparse STANE, the
// simplified per-time model and its sparse version.

#include "stane/init.hpp"
#include "stane/optimizer.hpp"
#include "stane/selection.hpp"
#include "stane/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace stane {

enum class Variant { stane, sparse, simplified, sparse_simplified };

inline Variant parse_variant(const std::string& s) {
  if (s == "stane") return Variant::stane;
  if (s == "sparse") return Variant::sparse;
  if (s == "simplified") return Variant::simplified;
  if (s == "sparse-simplified") return Variant::sparse_simplified;
  throw ConfigError("unknown variant '" + s + "' (expected stane|sparse|simplified|sparse-simplified)");
}

inline std::string variant_name(Variant v) {
  switch (v) {
    case Variant::stane: return "stane";
    case Variant::sparse: return "sparse";
    case Variant::simplified: return "simplified";
    case Variant::sparse_simplified: return "sparse-simplified";
  }
  return "";
}

inline bool is_per_time(Variant v) { return v == Variant::simplified || v == Variant::sparse_simplified; }
inline bool is_sparse(Variant v) { return v == Variant::sparse || v == Variant::sparse_simplified; }

struct PipelineConfig {
  int r_s = 2;
  int r_d = 3;
  int k = 3;
  /// Fixed MCP level for the sparse variants; unset selects mu by BIC_2 over
  /// `mu_grid`.
  std::optional<double> mu;
  std::vector<double> mu_grid = default_mu_grid(false);
  FitConfig prefit = FitConfig::simplified_defaults();
  FitConfig fit;

  void validate() const {
    if (r_s < 0 || r_d < 0) throw ConfigError("latent dimensions must be non-negative");
    if (k < 1) throw ConfigError("k must be positive");
    if (mu && !(*mu >= 0.0)) throw ConfigError("mu must be non-negative");
    for (double m : mu_grid)
      if (!(m > 0.0)) throw ConfigError("mu grid values must be positive");
    prefit.validate();
    fit.validate();
  }
};

struct PipelineResult {
  Variant variant = Variant::stane;
  ModelParams params;  // K = T with g_t = t for the per-time variants
  FitResult fit;
  double mu = 0.0;
  std::vector<GroupScore> mu_scores;  // filled when mu was selected
  std::optional<InitResult> init;     // group-level variants only
  std::vector<std::string> warnings;
};

namespace detail {

inline void apply_mu_selection(PipelineResult& out, MuSelection ms) {
  out.mu = ms.mu;
  out.fit = std::move(ms.best_fit);
  out.mu_scores = std::move(ms.scores);
  out.warnings = std::move(ms.warnings);
}

}  // namespace detail

/// Group-level fit (STANE or Sparse STANE) from an existing initialization.
inline PipelineResult fit_from_init(const AdjacencyTensor& a, Variant variant, const InitResult& init,
                                    const PipelineConfig& cfg) {
  if (is_per_time(variant)) throw ConfigError("fit_from_init needs a group-level variant");
  PipelineResult out;
  out.variant = variant;
  out.init = init;
  FitConfig c = cfg.fit;
  c.reassign = true;
  if (variant == Variant::stane) {
    c.mu = 0.0;
    out.fit = fit(a, init.params, c);
  } else if (cfg.mu) {
    c.mu = *cfg.mu;
    out.mu = *cfg.mu;
    out.fit = fit(a, init.params, c);
  } else {
    detail::apply_mu_selection(out, select_mu(a, init.params, cfg.mu_grid, c));
  }
  out.params = out.fit.params;
  return out;
}

inline PipelineResult run_variant(const AdjacencyTensor& a, Variant variant, const PipelineConfig& cfg) {
  cfg.validate();
  if (!is_per_time(variant)) {
    const InitResult init = initialize(a, cfg.r_s, cfg.r_d, cfg.k, cfg.prefit);
    return fit_from_init(a, variant, init, cfg);
  }
  PipelineResult out;
  out.variant = variant;
  FitConfig c = cfg.prefit;
  c.reassign = false;
  if (variant == Variant::simplified || cfg.mu) {
    c.mu = variant == Variant::simplified ? 0.0 : *cfg.mu;
    out.mu = c.mu;
    out.fit = fit_simplified(a, cfg.r_s, cfg.r_d, c).result;
  } else {
    if (static_cast<std::size_t>(cfg.r_s + cfg.r_d) > a.n_nodes())
      throw ConfigError("infeasible latent dimensions");
    const ModelParams start = random_simplified_start(a.n_nodes(), a.n_times(), cfg.r_s, cfg.r_d, c.seed);
    detail::apply_mu_selection(out, select_mu(a, start, cfg.mu_grid, c));
  }
  out.params = out.fit.params;
  return out;
}

}  // namespace stane
