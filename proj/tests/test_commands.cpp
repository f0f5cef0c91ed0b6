#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <gtest/gtest.h>

#include "sbfc/commands.hpp"

namespace sbfc::cli {
namespace {

namespace fs = std::filesystem;

class CommandsTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("sbfc_cmd_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }

  static std::string corral() { return std::string(SBFC_DATA_DIR) + "/corral.csv"; }

  RunConfig quick() const {
    RunConfig cfg;
    cfg.data = corral();
    cfg.iters = 2000;
    cfg.thin = 10;
    cfg.trace_out = path("trace.jsonl");
    return cfg;
  }

  static int run_cli(const std::string& args) {
    const std::string cmd = std::string(SBFC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  fs::path dir_;
};

TEST_F(CommandsTest, TrainWritesTraceAndSideFiles) {
  std::ostringstream out;
  const auto trace = cmd_train(quick(), out);
  EXPECT_EQ(trace.size(), 160u);
  EXPECT_TRUE(fs::exists(path("trace.jsonl")));
  EXPECT_TRUE(fs::exists(path("trace.jsonl.rankings.json")));
  EXPECT_TRUE(fs::exists(path("trace.jsonl.columns.json")));
  std::ifstream mf(path("trace.jsonl.manifest.json"));
  const auto manifest = nlohmann::json::parse(mf);
  EXPECT_EQ(manifest["d"], 6);
  EXPECT_EQ(manifest["sampler"]["iterations"], 2000);
  EXPECT_NE(out.str().find("samples: 160"), std::string::npos);
}

TEST_F(CommandsTest, PredictLabeledAndUnlabeled) {
  std::ostringstream out;
  auto cfg = quick();
  cmd_train(cfg, out);
  cfg.trace = cfg.trace_out;
  cfg.test = corral();
  cfg.pred_out = path("pred.csv");
  const auto labeled = cmd_predict(cfg, out);
  ASSERT_TRUE(labeled.accuracy.has_value());
  EXPECT_EQ(labeled.predictions.size(), 128u);
  EXPECT_GT(*labeled.accuracy, 0.7);

  cfg.test = write("unlabeled.csv", "A0,A1,B0,B1,Irrelevant,Correlated\n1,1,0,0,0,1\n0,0,0,0,1,0\n");
  std::ostringstream out2;
  cfg.pred_out.clear();
  const auto unlabeled = cmd_predict(cfg, out2);
  EXPECT_FALSE(unlabeled.accuracy.has_value());
  EXPECT_EQ(out2.str().rfind("row,p_0,p_1,predicted\n", 0), 0u);

  cfg.require_accuracy = true;
  EXPECT_THROW(cmd_predict(cfg, out2), ConfigError);
  cfg.require_accuracy = false;
  cfg.test = write("wide.csv", "a,b\n1,2\n");
  EXPECT_THROW(cmd_predict(cfg, out2), ValidationError);
}

TEST_F(CommandsTest, PredictRejectsTraceOfOtherDimension) {
  std::ostringstream out;
  auto cfg = quick();
  cfg.data = std::string(SBFC_DATA_DIR) + "/tiny_d2.csv";
  cmd_train(cfg, out);
  cfg.data = corral();
  cfg.trace = cfg.trace_out;
  cfg.test = corral();
  EXPECT_THROW(cmd_predict(cfg, out), ValidationError);
}

TEST_F(CommandsTest, CrossValidationFoldsAndDeterminism) {
  auto cfg = quick();
  cfg.metrics_out = path("cv.json");
  std::ostringstream out;
  const auto a = cmd_cv(cfg, out);
  ASSERT_EQ(a.folds.size(), 5u);
  std::vector<std::size_t> sizes;
  for (const auto& f : a.folds) sizes.push_back(f.n_test);
  EXPECT_EQ(sizes, (std::vector<std::size_t>{26, 26, 26, 25, 25}));
  const auto b = cmd_cv(cfg, out);
  EXPECT_EQ(a.mean_accuracy, b.mean_accuracy);
  std::ifstream mf(cfg.metrics_out);
  EXPECT_EQ(nlohmann::json::parse(mf)["folds"].size(), 5u);
}

TEST_F(CommandsTest, GraphDotAndJson) {
  std::ostringstream out;
  auto cfg = quick();
  cmd_train(cfg, out);
  cfg.trace = cfg.trace_out;
  cfg.json_out = path("avg.json");
  std::ostringstream dot;
  cmd_graph(cfg, dot);
  EXPECT_EQ(dot.str().rfind("graph sbfc {", 0), 0u);
  std::ifstream jf(cfg.json_out);
  const auto j = nlohmann::json::parse(jf);
  EXPECT_EQ(j["nodes"].size(), 6u);
  EXPECT_EQ(j["rankings"].size(), 6u);
}

TEST_F(CommandsTest, OracleCheckRulesOnly) {
  const auto ds = bundled::tiny(2);
  const auto r0 = oracle_check(ds, Hyperparams::for_data(ds), 0, 10, 1, 0.05);
  EXPECT_EQ(r0.tv, 1.0);
  EXPECT_FALSE(r0.pass);
  EXPECT_EQ(r0.classes, 6u);
  const auto big = bundled::random_dataset(10, 6, 2, 2, 1);
  EXPECT_THROW(oracle_check(big, Hyperparams::for_data(big), 10, 10, 1, 0.05), ConfigError);
}

TEST_F(CommandsTest, OracleCheckShortRun) {
  const auto ds = bundled::tiny(2);
  const auto r = oracle_check(ds, Hyperparams::for_data(ds), 200000, 10, 7, 0.05);
  EXPECT_EQ(r.samples, 200000u);
  EXPECT_TRUE(r.pass) << "TV " << r.tv;
}

TEST_F(CommandsTest, CliExitCodes) {
  EXPECT_EQ(run_cli("--help"), exit_codes::ok);
  EXPECT_EQ(run_cli(""), exit_codes::config);
  EXPECT_EQ(run_cli("train --bogus"), exit_codes::config);
  EXPECT_EQ(run_cli("train"), exit_codes::config);
  EXPECT_EQ(run_cli("train --data /nonexistent.csv"), exit_codes::io);
  const auto ragged = write("ragged.csv", "a,b,c\n1,2,3\n1,2\n");
  EXPECT_EQ(run_cli("train --data " + ragged), exit_codes::parse);
  const auto missing = write("missing.csv", "a,c\n?,0\n?,1\n");
  EXPECT_EQ(run_cli("train --data " + missing), exit_codes::validation);
  EXPECT_EQ(run_cli("train --data " + corral() + " --class-col nope"), exit_codes::config);
  EXPECT_EQ(run_cli("oracle-check --data " + corral()), exit_codes::config);
  EXPECT_EQ(run_cli("oracle-check --iters 0"), exit_codes::check_failed);
  const auto trace = path("t.jsonl");
  EXPECT_EQ(run_cli("train --data " + corral() + " --iters 500 --thin 5 --trace-out " + trace), exit_codes::ok);
  EXPECT_EQ(run_cli("graph --trace " + trace + " --dot-out " + path("g.dot")), exit_codes::ok);
  EXPECT_TRUE(fs::exists(path("g.dot")));
  const auto bad_trace = write("bad.jsonl", "not json\n");
  EXPECT_EQ(run_cli("graph --trace " + bad_trace), exit_codes::parse);
}

}  // namespace
}  // namespace sbfc::cli
