#pragma once

// Simulation-study replication: named tables, per-replication pipelines and
// mean/sd aggregation in the layout of the published tables.

#include "stane/eval.hpp"
#include "stane/pipeline.hpp"
#include "stane/random.hpp"
#include "stane/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace stane {

enum class Method { sim_stane, spa_sim_stane, stane, spa_stane };

inline std::string method_name(Method m) {
  switch (m) {
    case Method::sim_stane: return "sim_stane";
    case Method::spa_sim_stane: return "spa_sim_stane";
    case Method::stane: return "stane";
    case Method::spa_stane: return "spa_stane";
  }
  return "";
}

struct TableCase {
  std::string label;
  SimSpec spec;
};

struct TableDef {
  std::string id;
  std::vector<TableCase> cases;
  std::vector<Method> methods;
  /// (metric column, method) pairs written to the summary, in order.
  std::vector<std::pair<std::string, Method>> columns;
  /// Fraction of unordered pairs held out per slice; 0 disables hold-out.
  double holdout = 0.0;
};

namespace detail {

inline SimSpec case_spec(std::size_t n, std::size_t t, int k, int r_s, int r_d, std::size_t min_group,
                         double s0) {
  SimSpec s;
  s.n = n;
  s.t = t;
  s.k = k;
  s.r_s = r_s;
  s.r_d = r_d;
  s.min_group_size = min_group;
  s.s0 = s0;
  return s;
}

// The four simulation cases (network size, time points, groups, dimensions).
inline std::vector<TableCase> standard_cases(const std::string& which, double s0) {
  std::vector<TableCase> c;
  if (which == "n" || which == "all")
    for (std::size_t n : {200, 400, 800})
      c.push_back({"N=" + std::to_string(n), case_spec(n, 20, 3, 2, 3, 5, s0)});
  if (which == "t" || which == "all") {
    const std::size_t mins[] = {5, 6, 7};
    const std::size_t ts[] = {20, 25, 30};
    for (int i = 0; i < 3; ++i)
      c.push_back({"T=" + std::to_string(ts[i]), case_spec(200, ts[i], 3, 2, 3, mins[i], s0)});
  }
  if (which == "k" || which == "all") {
    const std::size_t mins[] = {6, 5, 4};
    for (int k = 3; k <= 5; ++k)
      c.push_back({"K=" + std::to_string(k), case_spec(400, 25, k, 2, 3, mins[k - 3], s0)});
  }
  if (which == "dims" || which == "all") {
    const int dims[3][2] = {{2, 3}, {4, 5}, {6, 7}};
    for (const auto& d : dims)
      c.push_back({"RS,RD=" + std::to_string(d[0]) + "," + std::to_string(d[1]),
                   case_spec(200, 20, 3, d[0], d[1], 5, s0)});
  }
  return c;
}

inline std::vector<std::pair<std::string, Method>> estimation_columns() {
  std::vector<std::pair<std::string, Method>> cols;
  for (const char* m : {"z_error", "u_error", "v_error", "p_error"})
    for (Method me : {Method::sim_stane, Method::stane}) cols.emplace_back(m, me);
  cols.emplace_back("nmi", Method::stane);
  return cols;
}

}  // namespace detail

inline std::vector<std::string> table_ids() { return {"t1", "t2", "t3", "t4", "t5", "t6", "linkpred"}; }

inline TableDef table_definition(const std::string& id) {
  TableDef d;
  d.id = id;
  if (id == "t1" || id == "t2" || id == "t3" || id == "t4") {
    const char* which = id == "t1" ? "n" : id == "t2" ? "t" : id == "t3" ? "k" : "dims";
    d.cases = detail::standard_cases(which, 0.0);
    d.methods = {Method::sim_stane, Method::stane};
    d.columns = detail::estimation_columns();
  } else if (id == "t5") {
    d.cases = detail::standard_cases("all", 0.3);
    d.methods = {Method::sim_stane, Method::spa_sim_stane, Method::stane, Method::spa_stane};
    for (Method m : d.methods) d.columns.emplace_back("p_error", m);
    d.columns.emplace_back("nmi", Method::stane);
    d.columns.emplace_back("nmi", Method::spa_stane);
  } else if (id == "t6") {
    for (double s0 : {0.3, 0.5})
      for (std::size_t n : {200, 400, 800}) {
        std::ostringstream label;
        label << "s0=" << s0 << ",N=" << n;
        d.cases.push_back({label.str(), detail::case_spec(n, 20, 3, 2, 3, 5, s0)});
      }
    d.methods = {Method::spa_sim_stane, Method::spa_stane};
    for (const char* m : {"tpr", "fpr"})
      for (Method me : d.methods) d.columns.emplace_back(m, me);
  } else if (id == "linkpred") {
    d.cases.push_back({"N=200", detail::case_spec(200, 20, 3, 2, 3, 5, 0.0)});
    d.methods = {Method::sim_stane, Method::spa_sim_stane, Method::stane, Method::spa_stane};
    for (const char* m : {"auroc", "aupr", "mse", "logloss"})
      for (Method me : d.methods) d.columns.emplace_back(m, me);
    d.holdout = 0.2;
  } else {
    throw ConfigError("unknown table id '" + id + "' (expected t1..t6 or linkpred)");
  }
  return d;
}

/// Seed of replication `rep` (0-based) under base seed `base`.
inline std::uint64_t replication_seed(std::uint64_t base, std::size_t rep) {
  return derive_seed(base, static_cast<std::uint64_t>(rep), Stream::replication);
}

struct ReplicationOutcome {
  std::map<Method, MetricsReport> metrics;
  std::vector<std::string> warnings;
};

inline double metric_value(const MetricsReport& r, const std::string& name) {
  const auto cols = MetricsReport::columns();
  const auto vals = r.values();
  for (std::size_t i = 0; i < cols.size(); ++i)
    if (cols[i] == name) {
      if (!vals[i]) throw MetricError("metric '" + name + "' not available");
      return *vals[i];
    }
  throw MetricError("unknown metric '" + name + "'");
}

/// One replication: simulate, optionally hold out pairs, fit each method,
/// score against the truth (and the held-out pairs).
inline ReplicationOutcome run_replication(const TableDef& def, const TableCase& tc, std::size_t rep,
                                          std::uint64_t base_seed, const PipelineConfig& base_cfg) {
  SimSpec spec = tc.spec;
  spec.seed = replication_seed(base_seed, rep);
  const ModelParams truth = gen_truth(spec);
  const AdjacencyTensor full = sample_adjacency(truth, spec.seed);
  std::optional<HoldoutSplit> split;
  if (def.holdout > 0.0) split = mask_holdout(full, def.holdout, spec.seed);
  const AdjacencyTensor& train = split ? split->masked : full;

  PipelineConfig cfg = base_cfg;
  cfg.r_s = spec.r_s;
  cfg.r_d = spec.r_d;
  cfg.k = spec.k;
  cfg.prefit.seed = spec.seed;
  cfg.fit.seed = spec.seed;

  auto score = [&](const ModelParams& est) {
    MetricsReport r = evaluate(est, truth);
    if (split) {
      const LinkMetrics lm = link_prediction_metrics(probabilities(est), full, split->held_out);
      r.auroc = lm.auroc;
      r.aupr = lm.aupr;
      r.mse = lm.mse;
      r.logloss = lm.logloss;
    }
    return r;
  };

  ReplicationOutcome out;
  auto wants = [&](Method m) { return std::find(def.methods.begin(), def.methods.end(), m) != def.methods.end(); };
  std::optional<InitResult> init;
  if (wants(Method::stane) || wants(Method::spa_stane)) {
    init = initialize(train, cfg.r_s, cfg.r_d, cfg.k, cfg.prefit);
    // the pre-fit is the simplified model fitted with the same settings
    if (wants(Method::sim_stane)) out.metrics[Method::sim_stane] = score(init->simplified.result.params);
  } else if (wants(Method::sim_stane)) {
    out.metrics[Method::sim_stane] = score(run_variant(train, Variant::simplified, cfg).params);
  }
  if (wants(Method::stane)) out.metrics[Method::stane] = score(fit_from_init(train, Variant::stane, *init, cfg).params);
  if (wants(Method::spa_stane)) {
    PipelineResult r = fit_from_init(train, Variant::sparse, *init, cfg);
    out.warnings.insert(out.warnings.end(), r.warnings.begin(), r.warnings.end());
    out.metrics[Method::spa_stane] = score(r.params);
  }
  if (wants(Method::spa_sim_stane)) {
    PipelineResult r = run_variant(train, Variant::sparse_simplified, cfg);
    out.warnings.insert(out.warnings.end(), r.warnings.begin(), r.warnings.end());
    out.metrics[Method::spa_sim_stane] = score(r.params);
  }
  return out;
}

/// Worker count from STANE_WORKERS (default 1). Affects speed only.
inline std::size_t worker_count() {
  const char* env = std::getenv("STANE_WORKERS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) throw ConfigError("STANE_WORKERS must be a positive integer");
  return static_cast<std::size_t>(v);
}

/// Runs job(i) for i in [0, n) on `workers` threads. Results must be written
/// to per-index slots by the job; the first exception is rethrown.
inline void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& job) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

/// Mean and sample standard deviation (0 for a single value).
inline MeanSd mean_sd(const std::vector<double>& x) {
  MeanSd r;
  if (x.empty()) return r;
  for (double v : x) r.mean += v;
  r.mean /= static_cast<double>(x.size());
  if (x.size() > 1) {
    double ss = 0.0;
    for (double v : x) ss += (v - r.mean) * (v - r.mean);
    r.sd = std::sqrt(ss / static_cast<double>(x.size() - 1));
  }
  return r;
}

}  // namespace stane
