#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "wsbm");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = wsbm::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("wsbm_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Small planted network with a missing list.
  void generate() {
    const auto r = run({"generate", "--preset", "sbm", "--groups", "2", "--group-size", "10", "--p-in", "0.7",
                        "--p-out", "0.1", "--missing-fraction", "0.1", "--seed", "3", "-o", path("net.tsv")});
    ASSERT_EQ(r.code, 0) << r.err;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, VersionAndHelp) {
  const auto v = run({"--version"});
  EXPECT_EQ(v.code, 0);
  EXPECT_NE(v.out.find("wsbm 0.1.0"), std::string::npos);
  const auto h = run({"fit", "--help"});
  EXPECT_EQ(h.code, 0);
  EXPECT_NE(h.out.find("--alpha"), std::string::npos);
}

TEST_F(Cli, GenerateWritesManifestAndFiles) {
  generate();
  const auto manifest = json::parse(run({"generate", "--preset", "fig2", "-o", path("toy.tsv")}).out);
  EXPECT_EQ(manifest["format"], "wsbm-generate");
  EXPECT_EQ(manifest["vertices"], 40);
  EXPECT_EQ(manifest["directed"], false);
  EXPECT_TRUE(manifest["missing_path"].is_null());
  EXPECT_TRUE(fs::exists(path("net.tsv.labels.tsv")));
  EXPECT_TRUE(fs::exists(path("net.tsv.missing.tsv")));
}

TEST_F(Cli, FitPredictAndNmiPipeline) {
  generate();
  auto r = run({"fit", "-i", path("net.tsv"), "--missing", path("net.tsv.missing.tsv"), "--k", "2", "--restarts",
                "4", "-o", path("fit.json"), "--labels-out", path("labels.tsv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto fit = json::parse(slurp(path("fit.json")));
  EXPECT_EQ(fit["format"], "wsbm-fit");
  EXPECT_EQ(fit["config"]["k"], 2);
  EXPECT_EQ(fit["init"], "kmeans");

  std::ofstream(path("pairs.txt")) << "# pairs\n0 1\n3 4\n";
  r = run({"predict", "--fit", path("fit.json"), "--pairs", path("pairs.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto pred = json::parse(r.out);
  ASSERT_EQ(pred["predictions"].size(), 2u);
  EXPECT_EQ(pred["predictions"][0]["src"], "0");

  r = run({"predict", "--fit", path("fit.json"), "--pairs", path("pairs.txt"), "--format", "csv"});
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "src,dst,existence,weight,approximate");

  r = run({"nmi", "--labels-a", path("labels.tsv"), "--labels-b", path("net.tsv.labels.tsv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "1.0\n");
}

TEST_F(Cli, FitCsvListsBeliefRows) {
  generate();
  const auto r = run({"fit", "-i", path("net.tsv"), "--k", "3", "--restarts", "1", "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string header;
  std::getline(lines, header);
  EXPECT_EQ(header, "vertex,label,p0,p1,p2");
}

TEST_F(Cli, SelectAndEvaluateReports) {
  generate();
  auto r = run({"select-k", "-i", path("net.tsv"), "--k-range", "1..3", "--restarts", "3", "--truth",
                path("net.tsv.labels.tsv"), "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto sel = json::parse(r.out);
  EXPECT_EQ(sel["chosen_k"], 2);
  EXPECT_EQ(sel["candidates"].size(), 3u);
  EXPECT_FALSE(sel["config"].contains("k"));

  r = run({"evaluate", "-i", path("net.tsv"), "--k", "2", "--trials", "2", "--restarts", "2", "--models",
           "pWSBM,DCBM", "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "trial,model,existence_mse,weight_mse,auc,elbo");
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 5);
}

TEST_F(Cli, OutputsDoNotDependOnThreads) {
  generate();
  const std::vector<std::string> base{"select-k", "-i", path("net.tsv"), "--k-range", "1..3", "--restarts", "4",
                                      "--seed", "11"};
  auto one = base, many = base;
  one.insert(one.end(), {"--threads", "1"});
  many.insert(many.end(), {"--threads", "3"});
  EXPECT_EQ(run(one).out, run(many).out);
  const auto a = run({"fit", "-i", path("net.tsv"), "--engine", "bp", "--restarts", "3", "--threads", "1"});
  const auto b = run({"fit", "-i", path("net.tsv"), "--engine", "bp", "--restarts", "3", "--threads", "2"});
  EXPECT_EQ(a.out, b.out);
}

TEST_F(Cli, ErrorsGiveOneLineAndExitOne) {
  generate();
  auto r = run({"fit", "-i", path("absent.tsv")});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.err.rfind("error: ", 0), 0u);
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);

  std::ofstream(path("bad.tsv")) << "0 1 1\n1 2 oops\n";
  r = run({"fit", "-i", path("bad.tsv")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("line 2"), std::string::npos);

  r = run({"fit", "-i", path("net.tsv"), "--alpha", "1.5"});
  EXPECT_EQ(r.code, 1);
  r = run({"fit", "-i", path("net.tsv"), "--degree-correct", "--engine", "bp"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("degree"), std::string::npos);
  r = run({"select-k", "-i", path("net.tsv"), "--k-range", "3..1"});
  EXPECT_EQ(r.code, 1);
  r = run({"evaluate", "-i", path("net.tsv"), "--models", "XYZ"});
  EXPECT_EQ(r.code, 1);
  r = run({});
  EXPECT_EQ(r.code, 1);
}

TEST_F(Cli, StrictNonConvergenceExitsTwoAfterWriting) {
  generate();
  const auto r = run({"fit", "-i", path("net.tsv"), "--k", "3", "--init", "dirichlet", "--restarts", "1",
                      "--max-iters", "1", "--strict", "-o", path("fit.json")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("converge"), std::string::npos);
  EXPECT_FALSE(json::parse(slurp(path("fit.json")))["converged"].get<bool>());
}
