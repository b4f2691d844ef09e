#include "stane/io.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <sys/wait.h>

using namespace stane;
using stane::testing::read_file;
using stane::testing::TempDir;

namespace {

int run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "\"" + STANE_CLI_PATH + "\" " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string toy() { return std::string(STANE_DATA_DIR) + "/toy_20x6.dnet"; }

std::size_t count_lines(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

// The toy fits stop at the iteration cap (exit 5) while still writing output.
bool fit_ok(int code) { return code == 0 || code == 5; }

}  // namespace

TEST(CliSimulate, FixedSeedGivesIdenticalBytes) {
  TempDir d("cli_sim");
  const std::string args = "simulate --n 30 --t 6 --k 2 --min-group 2 --seed 5 --reps 2 --out ";
  ASSERT_EQ(run_cli(args + d.file("a")), 0);
  ASSERT_EQ(run_cli(args + d.file("b")), 0);
  for (const char* f : {"rep_001/network.dnet", "rep_001/truth.json", "rep_002/network.dnet"})
    EXPECT_EQ(read_file(d.file(std::string("a/") + f)), read_file(d.file(std::string("b/") + f))) << f;
  EXPECT_NE(read_file(d.file("a/rep_001/network.dnet")), read_file(d.file("a/rep_002/network.dnet")));
  std::string cfg_b = read_file(d.file("b/config.toml"));
  const auto pos = cfg_b.find(d.file("b"));
  ASSERT_NE(pos, std::string::npos);
  cfg_b.replace(pos, d.file("b").size(), d.file("a"));
  EXPECT_EQ(read_file(d.file("a/config.toml")), cfg_b);
}

TEST(CliSimulate, HundredReplicationDirectories) {
  TempDir d("cli_sim100");
  ASSERT_EQ(run_cli("simulate --n 12 --t 6 --k 3 --min-group 2 --reps 100 --out " + d.file("o")), 0);
  std::size_t dirs = 0;
  for (const auto& e : std::filesystem::directory_iterator(d.file("o")))
    if (e.is_directory()) ++dirs;
  EXPECT_EQ(dirs, 100u);
  EXPECT_TRUE(std::filesystem::exists(d.file("o/rep_100/network.dnet")));
}

TEST(CliSimulate, CaseOneAndSparseTruthFiles) {
  TempDir d("cli_case1");
  ASSERT_EQ(run_cli("simulate --n 200 --t 20 --k 3 --rs 2 --rd 3 --s0 0.3 --reps 1 --out " + d.file("o")), 0);
  const ModelParams truth = load_params(d.file("o/rep_001/truth.json"));
  EXPECT_EQ(truth.n_nodes(), 200u);
  EXPECT_EQ(truth.n_times(), 20u);
  EXPECT_EQ(truth.n_groups(), 3u);
  EXPECT_EQ(truth.r_s(), 2);
  EXPECT_EQ(truth.r_d(), 3);
  for (const Matrix& u : truth.u) EXPECT_EQ(200u - nonzero_rows(u), 60u);
  const AdjacencyTensor a = load_tensor(d.file("o/rep_001/network.dnet"));
  EXPECT_EQ(a.n_nodes(), 200u);
}

TEST(CliSimulate, InfeasibleSpecIsConfigError) {
  TempDir d("cli_bad");
  EXPECT_EQ(run_cli("simulate --n 20 --t 4 --k 3 --min-group 2 --out " + d.file("o")), 2);
  EXPECT_EQ(run_cli("simulate --n 20 --no-such-flag --out " + d.file("o")), 2);
}

TEST(CliFit, SimplifiedVariantOmitsLabels) {
  TempDir d("cli_fit_simp");
  ASSERT_TRUE(fit_ok(run_cli("fit --data " + toy() + " --variant simplified --rs 2 --rd 2 --max-iter 50 --prefit-max-iter 50 --out " + d.file("o"))));
  const auto j = nlohmann::json::parse(read_file(d.file("o/params.json")));
  EXPECT_FALSE(j.contains("labels"));
  EXPECT_EQ(j["u"].size(), 6u);
  EXPECT_FALSE(std::filesystem::exists(d.file("o/support.csv")));
  EXPECT_TRUE(std::filesystem::exists(d.file("o/fit_log.csv")));
  const auto s = nlohmann::json::parse(read_file(d.file("o/summary.json")));
  EXPECT_EQ(s["variant"], "simplified");
}

TEST(CliFit, SparseVariantWritesSupportFile) {
  TempDir d("cli_fit_sparse");
  const int code = run_cli("fit --data " + toy() +
                           " --variant sparse --rs 2 --rd 2 --k 2 --mu-grid 0.01,0.1 --max-iter 50 "
                           "--prefit-max-iter 50 --out " + d.file("o"));
  ASSERT_TRUE(fit_ok(code)) << code;
  const std::string support = read_file(d.file("o/support.csv"));
  EXPECT_EQ(support.rfind("group,node\n", 0), 0u);
  const ModelParams p = load_params(d.file("o/params.json"));
  EXPECT_EQ(count_lines(support) - 1, nonzero_rows(p.u[0]) + nonzero_rows(p.u[1]));
  const auto s = nlohmann::json::parse(read_file(d.file("o/summary.json")));
  EXPECT_EQ(s["mu_scores"].size(), 2u);
}

TEST(CliFit, UnknownVariantAndMissingFile) {
  TempDir d("cli_fit_bad");
  EXPECT_EQ(run_cli("fit --data " + toy() + " --variant nope --out " + d.file("o")), 2);
  EXPECT_EQ(run_cli("fit --data " + d.file("missing.dnet") + " --out " + d.file("o")), 4);
  stane::testing::write_file(d.file("bad.dnet"), "3 1\n1 1 4\n");
  EXPECT_EQ(run_cli("fit --data " + d.file("bad.dnet") + " --out " + d.file("o")), 4);
}

TEST(CliPredict, MaskIsRequired) {
  TempDir d("cli_pred");
  EXPECT_EQ(run_cli("predict --data " + toy() + " --out " + d.file("o")), 2);
}

TEST(CliPredict, MaskThenPredict) {
  TempDir d("cli_pred2");
  ASSERT_EQ(run_cli("mask --data " + toy() + " --holdout 0.2 --seed 3 --out " + d.file("m")), 0);
  const int code = run_cli("predict --data " + toy() + " --mask " + d.file("m/holdout.dnet") +
                           " --rs 2 --rd 2 --k 2 --max-iter 30 --prefit-max-iter 30 --out " + d.file("p"));
  ASSERT_TRUE(fit_ok(code)) << code;
  const std::string lm = read_file(d.file("p/link_metrics.csv"));
  EXPECT_EQ(lm.rfind("auroc,aupr,mse,logloss\n", 0), 0u);
  EXPECT_EQ(count_lines(lm), 2u);
}

TEST(CliEval, TruthAgainstItself) {
  TempDir d("cli_eval");
  ASSERT_EQ(run_cli("simulate --n 30 --t 6 --k 2 --min-group 2 --s0 0.2 --reps 1 --out " + d.file("s")), 0);
  const std::string truth = d.file("s/rep_001/truth.json");
  ASSERT_EQ(run_cli("eval --params " + truth + " --truth " + truth + " --out " + d.file("e")), 0);
  const auto j = nlohmann::json::parse(read_file(d.file("e/metrics.json")));
  EXPECT_EQ(j["z_error"].get<double>(), 0.0);
  EXPECT_EQ(j["u_error"].get<double>(), 0.0);
  EXPECT_EQ(j["v_error"].get<double>(), 0.0);
  EXPECT_EQ(j["p_error"].get<double>(), 0.0);
  EXPECT_EQ(j["nmi"].get<double>(), 1.0);
  EXPECT_EQ(j["tpr"].get<double>(), 1.0);
  EXPECT_EQ(j["fpr"].get<double>(), 0.0);
  const std::string csv = read_file(d.file("e/metrics.csv"));
  EXPECT_EQ(csv.rfind("z_error,u_error,v_error,p_error,nmi,tpr,fpr", 0), 0u);
}

TEST(CliReplicate, UnknownTableIsConfigError) {
  TempDir d("cli_rep_bad");
  EXPECT_EQ(run_cli("replicate --table t9 --reps 1 --out " + d.file("o")), 2);
}

TEST(CliReplicate, SmallRunWritesTable) {
  TempDir d("cli_rep");
  const std::string args =
      "replicate --table t1 --case N=200 --reps 2 --max-iter 3 --prefit-max-iter 3 --seed 4 --out ";
  ASSERT_EQ(run_cli(args + d.file("a")), 0);
  const std::string table = read_file(d.file("a/table.csv"));
  std::istringstream in(table);
  std::string header;
  std::getline(in, header);
  EXPECT_NE(header.find("p_error.stane"), std::string::npos) << header;
  EXPECT_EQ(count_lines(table), 3u);  // header, mean, sd
  EXPECT_EQ(count_lines(read_file(d.file("a/replications.csv"))), 1u + 2u * 2u);
  ASSERT_EQ(run_cli(args + d.file("b"), "STANE_WORKERS=2"), 0);
  EXPECT_EQ(table, read_file(d.file("b/table.csv")));
}

TEST(CliConfig, EchoedConfigReproducesRun) {
  TempDir d("cli_cfg");
  ASSERT_EQ(run_cli("simulate --n 15 --t 4 --k 2 --min-group 2 --seed 8 --reps 1 --out " + d.file("a")), 0);
  const std::string cfg = read_file(d.file("a/config.toml"));
  EXPECT_NE(cfg.find("[simulate]"), std::string::npos);
  std::string edited = cfg;
  const auto pos = edited.find(d.file("a"));
  ASSERT_NE(pos, std::string::npos);
  edited.replace(pos, d.file("a").size(), d.file("b"));
  stane::testing::write_file(d.file("cfg.toml"), edited);
  ASSERT_EQ(run_cli("--config " + d.file("cfg.toml") + " simulate"), 0);
  EXPECT_EQ(read_file(d.file("a/rep_001/network.dnet")), read_file(d.file("b/rep_001/network.dnet")));
}
