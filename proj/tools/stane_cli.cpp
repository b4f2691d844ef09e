// stane: command-line front end for simulation, fitting, selection,
// evaluation, link prediction and table replication.

#include "stane/eval.hpp"
#include "stane/io.hpp"
#include "stane/pipeline.hpp"
#include "stane/replicate.hpp"
#include "stane/selection.hpp"
#include "stane/simulate.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace stane;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;
constexpr int kExitMaxIter = 5;

std::mutex log_mutex;

void log(const std::string& msg) {
  std::lock_guard<std::mutex> lock(log_mutex);
  std::cerr << "[stane] " << msg << std::endl;
}

void make_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string join(const fs::path& dir, const std::string& name) { return (dir / name).string(); }

// --- option groups -----------------------------------------------------------

struct FitOptions {
  std::string variant = "stane";
  int r_s = 2, r_d = 3, k = 3;
  std::optional<double> mu;
  std::vector<double> mu_grid;
  double gamma = 3.0;
  double eta = FitConfig{}.eta;
  int max_iter = FitConfig{}.max_iter;
  double tol = FitConfig{}.tol;
  double prefit_eta = FitConfig::simplified_defaults().eta;
  int prefit_max_iter = FitConfig::simplified_defaults().max_iter;
  std::uint64_t seed = 1;

  void add_to(CLI::App* app) {
    app->add_option("--variant", variant, "stane | sparse | simplified | sparse-simplified")->capture_default_str();
    app->add_option("--rs", r_s, "shared dimension R_S")->capture_default_str();
    app->add_option("--rd", r_d, "time-varying dimension R_D")->capture_default_str();
    app->add_option("--k", k, "number of temporal groups")->capture_default_str();
    app->add_option("--mu", mu, "fixed MCP level for sparse variants (default: select by BIC)");
    app->add_option("--mu-grid", mu_grid, "candidate MCP levels for BIC selection")->delimiter(',');
    app->add_option("--gamma", gamma, "MCP shape")->capture_default_str();
    app->add_option("--eta", eta, "step-size scale of the group-level fit")->capture_default_str();
    app->add_option("--max-iter", max_iter, "iteration cap of the group-level fit")->capture_default_str();
    app->add_option("--tol", tol, "relative objective tolerance")->capture_default_str();
    app->add_option("--prefit-eta", prefit_eta, "step-size scale of the simplified fit")->capture_default_str();
    app->add_option("--prefit-max-iter", prefit_max_iter, "iteration cap of the simplified fit")
        ->capture_default_str();
    app->add_option("--seed", seed, "random seed")->capture_default_str();
  }

  PipelineConfig pipeline() const {
    PipelineConfig c;
    c.r_s = r_s;
    c.r_d = r_d;
    c.k = k;
    c.mu = mu;
    if (!mu_grid.empty()) c.mu_grid = mu_grid;
    c.fit.eta = eta;
    c.fit.max_iter = max_iter;
    c.fit.tol = tol;
    c.fit.gamma = gamma;
    c.fit.seed = seed;
    c.prefit.eta = prefit_eta;
    c.prefit.max_iter = prefit_max_iter;
    c.prefit.tol = tol;
    c.prefit.gamma = gamma;
    c.prefit.seed = seed;
    c.validate();
    return c;
  }
};

struct SimulateOptions {
  SimSpec spec;
  int reps = 1;
  std::string out;
};

struct FitCommandOptions {
  std::string data, mask, out;
  FitOptions fit;
};

struct SelectOptions {
  std::string data, out;
  std::vector<int> rs_grid, rd_grid, k_grid;
  std::vector<double> mu_grid;
  FitOptions fit;
};

struct MaskOptions {
  std::string data, out;
  double holdout = 0.2;
  std::uint64_t seed = 1;
};

struct EvalOptions {
  std::string params, truth, out;
};

struct ReplicateOptions {
  std::string table, out, only_case;
  int reps = 100;
  std::uint64_t seed = 1;
  std::optional<double> holdout;
  FitOptions fit;
};

// --- shared helpers ----------------------------------------------------------

// Active subcommand's options (defaults included, unset optionals omitted) in
// a form accepted by --config.
void echo_config(const CLI::App& sub, const std::string& dir) {
  std::istringstream lines(sub.config_to_str(true, false));
  std::string text = "[" + sub.get_name() + "]\n", line;
  while (std::getline(lines, line))
    if (line.size() < 3 || line.compare(line.size() - 3, 3, "=\"\"") != 0) text += line + "\n";
  write_text(join(dir, "config.toml"), text);
}

AdjacencyTensor load_data(const std::string& path) {
  std::size_t dups = 0;
  AdjacencyTensor a = load_tensor(path, &dups);
  if (dups > 0) log("merged " + std::to_string(dups) + " duplicate edge lines in " + path);
  log("loaded " + path + ": N=" + std::to_string(a.n_nodes()) + ", T=" + std::to_string(a.n_times()) +
      ", edges=" + std::to_string(a.edge_count()));
  return a;
}

json scores_json(const std::vector<GroupScore>& scores) {
  json arr = json::array();
  for (const auto& s : scores)
    arr.push_back({{"k", s.k}, {"mu", s.mu}, {"neg_log_lik", s.nll}, {"bic", s.bic},
                   {"nonzero_rows", s.nonzero_rows}, {"ok", s.ok}});
  return arr;
}

std::string fit_log_csv(const FitResult& fr) {
  std::string s = "iter,objective\n";
  for (std::size_t i = 0; i < fr.objective_trace.size(); ++i)
    s += std::to_string(i) + "," + format_sig6(fr.objective_trace[i]) + "\n";
  return s;
}

std::string support_csv(const ModelParams& p) {
  std::string s = "group,node\n";
  for (std::size_t k = 0; k < p.u.size(); ++k) {
    const std::vector<bool> rows = row_support(p.u[k]);
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (rows[i]) s += std::to_string(k + 1) + "," + std::to_string(i + 1) + "\n";
  }
  return s;
}

json fit_summary(const AdjacencyTensor& a, const PipelineResult& r) {
  const double nll = neg_log_lik(a, r.params);
  const auto h = nonzero_row_counts(r.params);
  json j;
  j["variant"] = variant_name(r.variant);
  j["converged"] = r.fit.converged;
  j["n_iter"] = r.fit.n_iter;
  j["restarted"] = r.fit.restarted;
  j["eta_used"] = r.fit.eta_used;
  j["mu"] = r.mu;
  j["neg_log_lik"] = nll;
  j["objective"] = r.fit.objective_trace.empty() ? nll : r.fit.objective_trace.back();
  j["nonzero_rows"] = h;
  if (is_per_time(r.variant)) {
    j["bic1"] = bic1(nll, a.n_nodes(), a.n_times(), static_cast<int>(r.params.r_s()),
                     static_cast<int>(r.params.r_d()));
  } else {
    j["labels"] = r.params.groups.labels;
  }
  j["bic2"] = bic2(nll, a.n_nodes(), a.n_times(), h, FitConfig{}.c0);
  if (!r.mu_scores.empty()) j["mu_scores"] = scores_json(r.mu_scores);
  j["warnings"] = r.warnings;
  return j;
}

PipelineResult run_fit(const AdjacencyTensor& a, const FitOptions& o) {
  const Variant v = parse_variant(o.variant);
  const PipelineConfig cfg = o.pipeline();
  const auto t0 = std::chrono::steady_clock::now();
  log("fitting variant " + o.variant);
  PipelineResult r = run_variant(a, v, cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream msg;
  msg << "fit finished: " << r.fit.n_iter << " iterations, " << (r.fit.converged ? "converged" : "max-iter stop")
      << ", mu=" << r.mu << ", " << secs << " s";
  log(msg.str());
  for (const auto& w : r.warnings) log("warning: " + w);
  return r;
}

void write_fit_outputs(const std::string& dir, const AdjacencyTensor& a, const PipelineResult& r) {
  save_params(r.params, join(dir, "params.json"), is_per_time(r.variant));
  write_text(join(dir, "fit_log.csv"), fit_log_csv(r.fit));
  write_json(join(dir, "summary.json"), fit_summary(a, r));
  if (is_sparse(r.variant)) write_text(join(dir, "support.csv"), support_csv(r.params));
}

std::string metrics_csv(const MetricsReport& r) { return csv_header() + "\n" + csv_row(r) + "\n"; }

json metrics_json(const MetricsReport& r) {
  json j = json::object();
  const auto cols = MetricsReport::columns();
  const auto vals = r.values();
  for (std::size_t i = 0; i < cols.size(); ++i) j[cols[i]] = vals[i] ? json(*vals[i]) : json(nullptr);
  return j;
}

// --- commands ----------------------------------------------------------------

int cmd_simulate(const CLI::App& app, const SimulateOptions& o) {
  if (o.reps < 1) throw ConfigError("--reps must be positive");
  o.spec.validate();
  make_dir(o.out);
  echo_config(app, o.out);
  const auto reps = static_cast<std::size_t>(o.reps);
  parallel_for(reps, worker_count(), [&](std::size_t r) {
    SimSpec spec = o.spec;
    spec.seed = replication_seed(o.spec.seed, r);
    const ModelParams truth = gen_truth(spec);
    const AdjacencyTensor a = sample_adjacency(truth, spec.seed);
    char name[32];
    std::snprintf(name, sizeof name, "rep_%03zu", r + 1);
    const std::string dir = join(o.out, name);
    make_dir(dir);
    save_tensor(a, join(dir, "network.dnet"));
    save_params(truth, join(dir, "truth.json"));
    log("wrote " + dir);
  });
  return kExitOk;
}

int cmd_fit(const CLI::App& app, const FitCommandOptions& o) {
  AdjacencyTensor a = load_data(o.data);
  if (!o.mask.empty())
    a = a.with_mask(mask_from_pairs(a.n_nodes(), load_holdout_pairs(o.mask, a.n_nodes(), a.n_times())));
  make_dir(o.out);
  echo_config(app, o.out);
  const PipelineResult r = run_fit(a, o.fit);
  write_fit_outputs(o.out, a, r);
  return r.fit.converged ? kExitOk : kExitMaxIter;
}

int cmd_select(const CLI::App& app, const SelectOptions& o) {
  const AdjacencyTensor a = load_data(o.data);
  SelectionGrid grid = SelectionGrid::defaults(a.n_times());
  if (!o.rs_grid.empty()) grid.r_s_candidates = o.rs_grid;
  if (!o.rd_grid.empty()) grid.r_d_candidates = o.rd_grid;
  if (!o.k_grid.empty()) grid.k_candidates = o.k_grid;
  if (!o.mu_grid.empty()) grid.mu_candidates = o.mu_grid;
  const PipelineConfig cfg = o.fit.pipeline();
  FitConfig fc = cfg.fit;
  fc.reassign = true;
  make_dir(o.out);
  echo_config(app, o.out);
  log("model selection over " + std::to_string(grid.r_s_candidates.size() * grid.r_d_candidates.size()) +
      " dimension pairs and " + std::to_string(grid.k_candidates.size() * grid.mu_candidates.size()) +
      " (K, mu) pairs");
  const SelectionResult sel = select_model(a, grid, cfg.prefit, fc);
  for (const auto& w : sel.warnings) log("warning: " + w);
  json j;
  j["r_s"] = sel.r_s;
  j["r_d"] = sel.r_d;
  j["k"] = sel.k;
  j["mu"] = sel.mu;
  json s1 = json::array();
  for (const auto& d : sel.stage1)
    s1.push_back({{"r_s", d.r_s}, {"r_d", d.r_d}, {"neg_log_lik", d.nll}, {"bic", d.bic}, {"ok", d.ok}});
  j["stage1"] = s1;
  j["stage2"] = scores_json(sel.stage2);
  j["warnings"] = sel.warnings;
  write_json(join(o.out, "selection.json"), j);
  save_params(sel.best_fit.params, join(o.out, "params.json"));
  log("selected R_S=" + std::to_string(sel.r_s) + ", R_D=" + std::to_string(sel.r_d) +
      ", K=" + std::to_string(sel.k) + ", mu=" + format_sig6(sel.mu));
  return kExitOk;
}

int cmd_mask(const CLI::App& app, const MaskOptions& o) {
  const AdjacencyTensor a = load_data(o.data);
  const HoldoutSplit split = mask_holdout(a, o.holdout, o.seed);
  make_dir(o.out);
  echo_config(app, o.out);
  save_holdout_pairs(split.held_out, a.n_nodes(), join(o.out, "holdout.dnet"));
  log("held out " + std::to_string(split.held_out.front().size()) + " pairs per slice");
  return kExitOk;
}

int cmd_predict(const CLI::App& app, const FitCommandOptions& o) {
  if (o.mask.empty()) throw ConfigError("predict requires --mask (a hold-out pair file; see 'stane mask')");
  const AdjacencyTensor full = load_data(o.data);
  const auto held_out = load_holdout_pairs(o.mask, full.n_nodes(), full.n_times());
  const AdjacencyTensor train = full.with_mask(mask_from_pairs(full.n_nodes(), held_out));
  make_dir(o.out);
  echo_config(app, o.out);
  const PipelineResult r = run_fit(train, o.fit);
  write_fit_outputs(o.out, train, r);
  const LinkMetrics lm = link_prediction_metrics(probabilities(r.params), full, held_out);
  write_text(join(o.out, "link_metrics.csv"), "auroc,aupr,mse,logloss\n" + format_sig6(lm.auroc) + "," +
                                                  format_sig6(lm.aupr) + "," + format_sig6(lm.mse) + "," +
                                                  format_sig6(lm.logloss) + "\n");
  log("AuROC " + format_sig6(lm.auroc) + ", AuPR " + format_sig6(lm.aupr));
  return r.fit.converged ? kExitOk : kExitMaxIter;
}

int cmd_eval(const CLI::App& app, const EvalOptions& o) {
  const ModelParams est = load_params(o.params);
  const ModelParams truth = load_params(o.truth);
  const MetricsReport r = evaluate(est, truth);
  make_dir(o.out);
  echo_config(app, o.out);
  write_text(join(o.out, "metrics.csv"), metrics_csv(r));
  write_json(join(o.out, "metrics.json"), metrics_json(r));
  return kExitOk;
}

int cmd_replicate(const CLI::App& app, const ReplicateOptions& o) {
  if (o.reps < 1) throw ConfigError("--reps must be positive");
  TableDef def = table_definition(o.table);
  if (o.holdout) {
    if (def.holdout == 0.0) throw ConfigError("--holdout applies to the linkpred table only");
    def.holdout = *o.holdout;
  }
  if (!o.only_case.empty()) {
    std::vector<TableCase> keep;
    for (const auto& c : def.cases)
      if (c.label == o.only_case) keep.push_back(c);
    if (keep.empty()) throw ConfigError("table " + o.table + " has no case '" + o.only_case + "'");
    def.cases = keep;
  }
  FitOptions fo = o.fit;
  const PipelineConfig base = fo.pipeline();
  make_dir(o.out);
  echo_config(app, o.out);

  const auto reps = static_cast<std::size_t>(o.reps);
  const std::size_t jobs = def.cases.size() * reps;
  std::vector<ReplicationOutcome> results(jobs);
  parallel_for(jobs, worker_count(), [&](std::size_t i) {
    const TableCase& tc = def.cases[i / reps];
    const std::size_t rep = i % reps;
    const auto t0 = std::chrono::steady_clock::now();
    results[i] = run_replication(def, tc, rep, o.seed, base);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream msg;
    msg << o.table << " " << tc.label << " rep " << rep + 1 << "/" << reps << " done (" << secs << " s)";
    log(msg.str());
    for (const auto& w : results[i].warnings) log("warning: " + w);
  });

  std::string raw = "case,rep,method," + csv_header() + "\n";
  for (std::size_t i = 0; i < jobs; ++i)
    for (const auto& [m, rep_metrics] : results[i].metrics)
      raw += def.cases[i / reps].label + "," + std::to_string(i % reps + 1) + "," + method_name(m) + "," +
             csv_row(rep_metrics) + "\n";
  write_text(join(o.out, "replications.csv"), raw);

  // one mean row and one sd row per case
  std::string table = "case,stat";
  for (const auto& [metric, m] : def.columns) table += "," + metric + "." + method_name(m);
  table += "\n";
  for (std::size_t c = 0; c < def.cases.size(); ++c) {
    std::vector<MeanSd> stats;
    for (const auto& [metric, m] : def.columns) {
      std::vector<double> xs;
      for (std::size_t r = 0; r < reps; ++r) xs.push_back(metric_value(results[c * reps + r].metrics.at(m), metric));
      stats.push_back(mean_sd(xs));
    }
    std::string mean_row = def.cases[c].label + ",mean", sd_row = def.cases[c].label + ",sd";
    for (const auto& s : stats) {
      mean_row += "," + format_sig6(s.mean);
      sd_row += "," + format_sig6(s.sd);
    }
    table += mean_row + "\n" + sd_row + "\n";
  }
  write_text(join(o.out, "table.csv"), table);
  log("wrote " + join(o.out, "table.csv"));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"STANE dynamic network embedding"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from a TOML file (as echoed in config.toml)");

  SimulateOptions sim;
  auto* c_sim = app.add_subcommand("simulate", "generate synthetic dynamic networks and their truth");
  c_sim->add_option("--n", sim.spec.n, "number of nodes")->capture_default_str();
  c_sim->add_option("--t", sim.spec.t, "number of time points")->capture_default_str();
  c_sim->add_option("--k", sim.spec.k, "number of temporal groups")->capture_default_str();
  c_sim->add_option("--rs", sim.spec.r_s, "shared dimension R_S")->capture_default_str();
  c_sim->add_option("--rd", sim.spec.r_d, "time-varying dimension R_D")->capture_default_str();
  c_sim->add_option("--s0", sim.spec.s0, "proportion of zero rows per group embedding")->capture_default_str();
  c_sim->add_option("--min-group", sim.spec.min_group_size, "minimum time points per group")->capture_default_str();
  c_sim->add_option("--seed", sim.spec.seed, "base seed")->capture_default_str();
  c_sim->add_option("--reps", sim.reps, "number of replications")->capture_default_str();
  c_sim->add_option("--out", sim.out, "output directory")->required();

  FitCommandOptions fit_o;
  auto* c_fit = app.add_subcommand("fit", "fit a model variant to a DNET file");
  c_fit->add_option("--data", fit_o.data, "DNET input")->required();
  c_fit->add_option("--mask", fit_o.mask, "hold-out pair file; listed pairs are excluded from fitting");
  c_fit->add_option("--out", fit_o.out, "output directory")->required();
  fit_o.fit.add_to(c_fit);

  SelectOptions sel;
  auto* c_sel = app.add_subcommand("select", "choose R_S, R_D, K and mu by BIC");
  c_sel->add_option("--data", sel.data, "DNET input")->required();
  c_sel->add_option("--out", sel.out, "output directory")->required();
  c_sel->add_option("--rs-grid", sel.rs_grid, "R_S candidates (default 1..6)")->delimiter(',');
  c_sel->add_option("--rd-grid", sel.rd_grid, "R_D candidates (default 1..6)")->delimiter(',');
  c_sel->add_option("--k-grid", sel.k_grid, "K candidates (default 1..min(8,T))")->delimiter(',');
  c_sel->add_option("--mu-grid", sel.mu_grid, "mu candidates (default 0 and 0.01..1)")->delimiter(',');
  c_sel->add_option("--gamma", sel.fit.gamma, "MCP shape")->capture_default_str();
  c_sel->add_option("--eta", sel.fit.eta, "step-size scale of the group-level fits")->capture_default_str();
  c_sel->add_option("--max-iter", sel.fit.max_iter, "iteration cap of the group-level fits")->capture_default_str();
  c_sel->add_option("--tol", sel.fit.tol, "relative objective tolerance")->capture_default_str();
  c_sel->add_option("--prefit-eta", sel.fit.prefit_eta, "step-size scale of the simplified fits")
      ->capture_default_str();
  c_sel->add_option("--prefit-max-iter", sel.fit.prefit_max_iter, "iteration cap of the simplified fits")
      ->capture_default_str();
  c_sel->add_option("--seed", sel.fit.seed, "random seed")->capture_default_str();

  MaskOptions mask_o;
  auto* c_mask = app.add_subcommand("mask", "draw a symmetric hold-out pair set");
  c_mask->add_option("--data", mask_o.data, "DNET input")->required();
  c_mask->add_option("--holdout", mask_o.holdout, "fraction of unordered pairs held out per slice")
      ->capture_default_str();
  c_mask->add_option("--seed", mask_o.seed, "random seed")->capture_default_str();
  c_mask->add_option("--out", mask_o.out, "output directory")->required();

  FitCommandOptions pred;
  auto* c_pred = app.add_subcommand("predict", "fit with held-out pairs masked and score them");
  c_pred->add_option("--data", pred.data, "DNET input (full network)")->required();
  c_pred->add_option("--mask", pred.mask, "hold-out pair file from 'stane mask'");
  c_pred->add_option("--out", pred.out, "output directory")->required();
  pred.fit.add_to(c_pred);

  EvalOptions ev;
  auto* c_eval = app.add_subcommand("eval", "score estimated parameters against the truth");
  c_eval->add_option("--params", ev.params, "estimated params.json")->required();
  c_eval->add_option("--truth", ev.truth, "truth params JSON")->required();
  c_eval->add_option("--out", ev.out, "output directory")->required();

  ReplicateOptions rep;
  auto* c_rep = app.add_subcommand("replicate", "run a simulation table across seeded replications");
  c_rep->add_option("--table", rep.table, "t1 | t2 | t3 | t4 | t5 | t6 | linkpred")->required();
  c_rep->add_option("--reps", rep.reps, "replications per case")->capture_default_str();
  c_rep->add_option("--seed", rep.seed, "base seed")->capture_default_str();
  c_rep->add_option("--case", rep.only_case, "run only the case with this label (e.g. N=200)");
  c_rep->add_option("--holdout", rep.holdout, "hold-out fraction for linkpred");
  c_rep->add_option("--out", rep.out, "output directory")->required();
  c_rep->add_option("--mu", rep.fit.mu, "fixed MCP level (default: select by BIC)");
  c_rep->add_option("--mu-grid", rep.fit.mu_grid, "candidate MCP levels")->delimiter(',');
  c_rep->add_option("--gamma", rep.fit.gamma, "MCP shape")->capture_default_str();
  c_rep->add_option("--eta", rep.fit.eta, "step-size scale of the group-level fit")->capture_default_str();
  c_rep->add_option("--max-iter", rep.fit.max_iter, "iteration cap of the group-level fit")->capture_default_str();
  c_rep->add_option("--tol", rep.fit.tol, "relative objective tolerance")->capture_default_str();
  c_rep->add_option("--prefit-eta", rep.fit.prefit_eta, "step-size scale of the simplified fit")
      ->capture_default_str();
  c_rep->add_option("--prefit-max-iter", rep.fit.prefit_max_iter, "iteration cap of the simplified fit")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*c_sim) return cmd_simulate(*c_sim, sim);
    if (*c_fit) return cmd_fit(*c_fit, fit_o);
    if (*c_sel) return cmd_select(*c_sel, sel);
    if (*c_mask) return cmd_mask(*c_mask, mask_o);
    if (*c_pred) return cmd_predict(*c_pred, pred);
    if (*c_eval) return cmd_eval(*c_eval, ev);
    if (*c_rep) return cmd_replicate(*c_rep, rep);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const MetricError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const FormatError& e) {
    std::cerr << "I/O error (malformed input): " << e.what() << "\n";
    return kExitIo;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "I/O error (malformed JSON): " << e.what() << "\n";
    return kExitIo;
  }
  return kExitConfig;
}
