#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"

namespace memexperts::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "memexperts");
  std::ostringstream out, err;
  Result r;
  r.code = run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

class Cli : public ::testing::Test {
 protected:
  fs::path dir;

  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir = fs::temp_directory_path() / (std::string("memexperts_cli_") + info->name());
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string path(const std::string& name) const { return (dir / name).string(); }
};

TEST_F(Cli, RunOnTheTrapReportsTheWinner) {
  const Result r = invoke({"run", "--n", "3", "--T", "5", "--stream", "evicttrap", "--algo",
                           "mwu", "--seed", "1", "--out", path("trap")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("best_expert 2 loss 1"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("final_regret "), std::string::npos);
  EXPECT_NE(r.out.find("peak_words 10"), std::string::npos);
  const auto csv = lines_of(slurp(dir / "trap" / "regret.csv"));
  ASSERT_EQ(csv.size(), 6u);
  EXPECT_EQ(csv[0], "day,cumulative_regret");
  EXPECT_EQ(csv[1].rfind("1,", 0), 0u);
  const auto row = nlohmann::json::parse(lines_of(slurp(dir / "trap" / "run.jsonl")).at(0));
  EXPECT_EQ(row.at("best_expert"), 2);
  EXPECT_FALSE(fs::exists(dir / "trap" / "trace.json"));
}

TEST_F(Cli, RunInfersShapeFromACsvStream) {
  {
    std::ofstream csv(path("losses.csv"));
    csv << "1,0,0\n0,0,0\n0,0,1\n0,1,0\n1,1,0\n";
  }
  const Result r = invoke({"run", "--stream", path("losses.csv"), "--algo", "mwu", "--m", "1",
                           "--seed", "4", "--out", path("csv")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("best_expert 2 loss 1"), std::string::npos);
}

TEST_F(Cli, SingleExpertHasZeroRegret) {
  const Result r = invoke({"run", "--n", "1", "--T", "50", "--algo", "mwu", "--seed", "2",
                           "--out", path("one")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("final_regret 0\n"), std::string::npos) << r.out;
}

TEST_F(Cli, HierarchicalRunWritesATraceThatDiagnoses) {
  const Result r = invoke({"run", "--n", "64", "--m", "8", "--T", "2048", "--stream", "drifting",
                           "--algo", "hier", "--seed", "3", "--out", path("hier")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  ASSERT_TRUE(fs::exists(dir / "hier" / "trace.json"));
  const Result d = invoke({"diagnose", "--trace", path("hier/trace.json"), "--out",
                           path("report.json")});
  ASSERT_EQ(d.code, kExitOk) << d.err;
  EXPECT_NE(d.out.find("level 0 T="), std::string::npos);
  EXPECT_NE(d.out.find("stay_before_actualization "), std::string::npos);
  EXPECT_NE(d.out.find("reference (n/m)*ln(1/delta) = "), std::string::npos);
  const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  EXPECT_EQ(report.at("delta"), 0.05);
  EXPECT_TRUE(report.contains("within_reference"));
}

TEST_F(Cli, MissingSeedIsDrawnAndReported) {
  const Result r = invoke({"run", "--n", "4", "--T", "20", "--algo", "mwu", "--out", path("s")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.err.rfind("seed: ", 0), 0u);
}

TEST_F(Cli, UnknownHorizonRoutesThroughTheDoublingWrapper) {
  const Result r = invoke({"run", "--n", "8", "--T", "300", "--algo", "hier", "--unknown-horizon",
                           "--max-guess", "512", "--seed", "1", "--out", path("uh")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto row = nlohmann::json::parse(lines_of(slurp(dir / "uh" / "run.jsonl")).at(0));
  EXPECT_EQ(row.at("config").at("algorithm"), "doubling");
  EXPECT_FALSE(fs::exists(dir / "uh" / "trace.json"));
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(invoke({"--help"}).code, kExitOk);
  EXPECT_EQ(invoke({}).code, kExitUsage);
  EXPECT_EQ(invoke({"run", "--n", "4", "--T", "10", "--algo", "bogus"}).code, kExitUsage);
  EXPECT_EQ(invoke({"run", "--n", "4", "--T", "10", "--stream", "iid:nope=1", "--seed", "1",
                    "--out", path("x")})
                .code,
            kExitUsage);
  {
    std::ofstream csv(path("bad.csv"));
    csv << "0,1\n0.5,2\n";
  }
  const Result bad = invoke({"run", "--stream", path("bad.csv"), "--algo", "mwu", "--seed", "1",
                             "--out", path("bad")});
  EXPECT_EQ(bad.code, kExitRuntime);
  EXPECT_NE(bad.err.find("line 2"), std::string::npos) << bad.err;
}

TEST_F(Cli, SweepGridProducesOneRowPerTrial) {
  {
    std::ofstream grid(path("grid.json"));
    grid << R"({"n": [16, 32], "m": 4, "T": [200, 400], "variants": ["mwu", "hier"],
               "trials": 3, "seed": 5})";
  }
  // 2 x 2 cells, 2 variants, 3 trials.
  const Result r = invoke({"sweep", "--grid", path("grid.json"), "--out", path("a")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto rows = lines_of(slurp(dir / "a" / "sweep.jsonl"));
  EXPECT_EQ(rows.size(), 24u);
  const auto summary = lines_of(slurp(dir / "a" / "summary.csv"));
  ASSERT_EQ(summary.size(), 5u);
  EXPECT_NE(summary[0].find("mwu_median_regret"), std::string::npos);
  EXPECT_NE(summary[0].find("hier_median_peak_words"), std::string::npos);
  EXPECT_EQ(r.out, slurp(dir / "a" / "summary.csv"));

  const Result again = invoke({"sweep", "--grid", path("grid.json"), "--out", path("b")});
  ASSERT_EQ(again.code, kExitOk);
  EXPECT_EQ(slurp(dir / "a" / "sweep.jsonl"), slurp(dir / "b" / "sweep.jsonl"));
  EXPECT_EQ(slurp(dir / "a" / "summary.csv"), slurp(dir / "b" / "summary.csv"));
}

TEST_F(Cli, SweepFromFlags) {
  const Result r = invoke({"sweep", "--n", "8,16", "--m", "2", "--T", "100", "--stream", "iid",
                           "--stream", "constant:c=0.5", "--variants", "mwu", "--trials", "2",
                           "--seed", "1", "--out", path("f")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(lines_of(slurp(dir / "f" / "sweep.jsonl")).size(), 8u);
  EXPECT_EQ(invoke({"sweep", "--n", "8"}).code, kExitUsage);
}

TEST_F(Cli, ConfigFileSuppliesOptions) {
  {
    std::ofstream cfg(path("run.toml"));
    cfg << "[run]\nn=3\nT=5\nstream=\"evicttrap\"\nalgo=\"mwu\"\nseed=1\nout=\""
        << path("cfg") << "\"\n";
  }
  const Result r = invoke({"--config", path("run.toml"), "run"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("best_expert 2 loss 1"), std::string::npos);
}

TEST_F(Cli, StreamCommandWritesCsv) {
  const Result r = invoke({"stream", "--stream", "evicttrap", "--n", "3", "--T", "5", "--out", "-"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out, "# n=3 T=5\n1,0,0\n0,0,0\n0,0,1\n0,1,0\n1,1,0\n");
  const Result f = invoke({"stream", "--stream", "iid", "--n", "4", "--T", "10", "--seed", "2",
                           "--out", path("s.csv")});
  ASSERT_EQ(f.code, kExitOk) << f.err;
  EXPECT_EQ(lines_of(slurp(dir / "s.csv")).size(), 11u);
}

}  // namespace
}  // namespace memexperts::cli
