#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "rankforge/cli/commands.hpp"
#include "rankforge/io.hpp"
#include "rankforge/metrics.hpp"
#include "rankforge/trainer.hpp"

using namespace rankforge;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result rf(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  Result r;
  r.code = cli::run(args, out, err);
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

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("rankforge_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }
  std::string str(const std::string& name) const { return path(name).string(); }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream f(path(name), std::ios::binary);
    f << text;
  }

  fs::path dir_;
};

const std::string kSmoke = std::string(RANKFORGE_CONFIG_DIR) + "/smoke.yaml";

}  // namespace

TEST_F(CliTest, SmokeTrainWritesThreeCheckpoints) {
  const auto r = rf({"train", "--config", kSmoke, "--out", str("runs")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  std::size_t checkpoints = 0;
  for (const auto& entry : fs::recursive_directory_iterator(path("runs"))) {
    if (entry.path().filename() == "checkpoint.txt") {
      ++checkpoints;
      EXPECT_NO_THROW(read_checkpoint_file(entry.path()));
      EXPECT_TRUE(fs::exists(entry.path().parent_path() / "train.log"));
      EXPECT_TRUE(fs::exists(entry.path().parent_path() / "validation.run"));
    }
  }
  EXPECT_EQ(checkpoints, 3u);
  EXPECT_EQ(r.out.rfind("seed\tbest_step\tndcg@10\tdirectory\n", 0), 0u);
}

TEST_F(CliTest, TrainTwiceIsByteIdentical) {
  ASSERT_EQ(rf({"train", "--config", kSmoke, "--seed", "1", "--out", str("a")}).code, 0);
  ASSERT_EQ(rf({"train", "--config", kSmoke, "--seed", "1", "--out", str("b")}).code, 0);
  const auto hash = fs::directory_iterator(path("a"))->path().filename();
  for (const char* file : {"train.log", "checkpoint.txt", "validation.run"}) {
    const std::string first = slurp(path("a") / hash / "1" / file);
    EXPECT_FALSE(first.empty()) << file;
    EXPECT_EQ(first, slurp(path("b") / hash / "1" / file)) << file;
  }
}

TEST_F(CliTest, MissingQrelsFileNamesKey) {
  write("f.tsv", "q\ta\t1\n");
  write("t.tsv", "q\ta\tb\t1\t0\n");
  write("exp.yaml",
        "objective: margin_mse\n"
        "data: {features: f.tsv, qrels: nowhere.qrels, triplets: t.tsv, validation_features: f.tsv, "
        "validation_qrels: f.tsv}\n");
  const auto r = rf({"train", "--config", str("exp.yaml"), "--out", str("runs")});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("data.qrels"), std::string::npos) << r.err;
}

TEST_F(CliTest, DivergenceExitsNumerical) {
  write("div.yaml",
        "objective: margin_mse\nseeds: [4]\n"
        "optimizer: {learning_rate: 1.0e+306, warmup_steps: 1, max_steps: 50}\n"
        "validation: {every: 10}\n"
        "data: {planted: {train_queries: 20, validation_queries: 5, test_queries: 5}}\n");
  const auto r = rf({"train", "--config", str("div.yaml"), "--out", str("runs")});
  EXPECT_EQ(r.code, cli::kExitNumerical);
  EXPECT_NE(r.err.find("seed 4"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("diverged at step"), std::string::npos) << r.err;
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(rf({}).code, cli::kExitUsage);
  EXPECT_EQ(rf({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(rf({"train"}).code, cli::kExitUsage);
  EXPECT_EQ(rf({"--format", "xml", "gradcheck", "--objective", "bce"}).code, cli::kExitUsage);
  EXPECT_EQ(rf({"--help"}).code, cli::kExitOk);
}

TEST_F(CliTest, GenerateThenRerankMatchesInMemoryOrdering) {
  ASSERT_EQ(rf({"generate", "--out", str("data"), "--config", kSmoke}).code, 0);
  const auto r = rf({"rerank", "--checkpoint", str("data/teacher.checkpoint.txt"), "--features",
                     str("data/test.features.tsv"), "--out", str("test.run")});
  ASSERT_EQ(r.code, 0) << r.err;
  const Checkpoint teacher = read_checkpoint_file(path("data/teacher.checkpoint.txt"));
  const TrecRun expected = make_run(score_run(teacher.params, read_features_file(path("data/test.features.tsv"))),
                                    "rankforge");
  std::ostringstream text;
  write_run(text, expected);
  EXPECT_EQ(slurp(path("test.run")), text.str());

  // The teacher ranks its own grades perfectly.
  const auto e = rf({"eval", "--run", str("test.run"), "--qrels", str("data/test.qrels")});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_NE(e.out.find("ndcg@10\t1\t"), std::string::npos) << e.out;
}

TEST_F(CliTest, RerankDimensionMismatchAndEmptyInput) {
  ASSERT_EQ(rf({"generate", "--out", str("data"), "--config", kSmoke}).code, 0);
  write("bad.tsv", "q\ta\t1\t2\n");
  EXPECT_EQ(rf({"rerank", "--checkpoint", str("data/teacher.checkpoint.txt"), "--features", str("bad.tsv"), "--out",
                str("x.run")})
                .code,
            cli::kExitData);
  write("empty.tsv", "");
  const auto r = rf({"rerank", "--checkpoint", str("data/teacher.checkpoint.txt"), "--features", str("empty.tsv"),
                     "--out", str("empty.run")});
  EXPECT_EQ(r.code, cli::kExitOk) << r.err;
  ASSERT_TRUE(fs::exists(path("empty.run")));
  EXPECT_EQ(fs::file_size(path("empty.run")), 0u);
}

TEST_F(CliTest, RerankThousandCandidatesUnderHundredMilliseconds) {
  ASSERT_EQ(rf({"generate", "--out", str("data"), "--config", kSmoke}).code, 0);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  FeatureTable table;
  for (int i = 0; i < 1000; ++i) {
    FeatureVector x(16);
    for (double& v : x) v = normal(rng);
    table.add("q", "p" + std::to_string(i), x);
  }
  {
    std::ofstream f(path("big.tsv"));
    write_features(f, table);
  }
  const auto start = std::chrono::steady_clock::now();
  const auto r = rf({"rerank", "--checkpoint", str("data/teacher.checkpoint.txt"), "--features", str("big.tsv"),
                     "--out", str("big.run")});
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_LT(ms, 100.0);
  EXPECT_EQ(read_run_file(path("big.run")).queries.at(0).entries.size(), 1000u);
}

TEST_F(CliTest, EvalPerfectRunAndUnjudgedRun) {
  write("q.qrels", "q1 0 a 2\nq1 0 b 1\nq1 0 c 0\nq2 0 x 1\n");
  write("perfect.run", "q1 Q0 a 1 3.0 t\nq1 Q0 b 2 2.0 t\nq1 Q0 c 3 1.0 t\nq2 Q0 x 1 1.0 t\n");
  const auto r = rf({"eval", "--run", str("perfect.run"), "--qrels", str("q.qrels"), "--metric", "ndcg@10",
                     "--metric", "mrr@10", "--metric", "recall", "--k", "1000"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "metric\tmean\tqueries\texcluded\nndcg@10\t1\t2\t0\nmrr@10\t1\t2\t0\nrecall@1000\t1\t2\t0\n");

  write("unjudged.run", "q9 Q0 zz 1 1.0 t\n");
  const auto u = rf({"eval", "--run", str("unjudged.run"), "--qrels", str("q.qrels")});
  EXPECT_EQ(u.code, 0);
  EXPECT_EQ(u.out, "metric\tmean\tqueries\texcluded\nndcg@10\t0\t0\t1\n");
  EXPECT_NE(u.err.find("0 queries"), std::string::npos);
}

TEST_F(CliTest, EvalMatchesMetricsModuleExactly) {
  write("q.qrels", "q1 0 a 2\nq1 0 b 1\nq2 0 x 1\nq2 0 y 3\n");
  write("r.run", "q1 Q0 b 1 0.9 t\nq1 Q0 z 2 0.5 t\nq1 Q0 a 3 0.1 t\nq2 Q0 x 1 2.0 t\nq2 Q0 y 2 1.0 t\n");
  const auto r = rf({"--format", "records", "eval", "--run", str("r.run"), "--qrels", str("q.qrels")});
  ASSERT_EQ(r.code, 0);
  const double expected =
      ndcg_at_k(to_scored_lists(read_run_file(path("r.run"))), read_qrels_file(path("q.qrels")).pool, 10).mean;
  const auto pos = r.out.find("\"mean\":");
  ASSERT_NE(pos, std::string::npos);
  EXPECT_EQ(std::stod(r.out.substr(pos + 7)), expected);
}

TEST_F(CliTest, EvalErrors) {
  write("q.qrels", "q1 0 a 2\n");
  write("broken.run", "q1 Q0 a one 1.0 t\n");
  const auto r = rf({"eval", "--run", str("broken.run"), "--qrels", str("q.qrels")});
  EXPECT_EQ(r.code, cli::kExitData);
  EXPECT_NE(r.err.find(":1:"), std::string::npos) << r.err;
  EXPECT_EQ(rf({"eval", "--run", str("broken.run"), "--qrels", str("q.qrels"), "--metric", "map@5"}).code,
            cli::kExitUsage);
}

TEST_F(CliTest, CompareFixtureMatrix) {
  const auto r = rf({"compare", "--matrix", std::string(RANKFORGE_TEST_DATA_DIR) + "/objectives_54.tsv", "--report",
                     str("report.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto cd_pos = r.out.find("critical_difference\t");
  ASSERT_NE(cd_pos, std::string::npos);
  EXPECT_NEAR(std::stod(r.out.substr(cd_pos + 20)), 1.03, 0.015);
  EXPECT_NE(r.out.find("\n3\tbce\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("\n1\tinfonce,margin_mse\n"), std::string::npos) << r.out;
  EXPECT_TRUE(fs::exists(path("report.json")));
}

TEST_F(CliTest, CompareIdenticalColumnsShareTier) {
  std::string m = "instance\ta\tb\tc\n";
  for (int i = 0; i < 10; ++i) m += "i" + std::to_string(i) + "\t0.5\t0.5\t0.1\n";
  write("m.tsv", m);
  const auto r = rf({"compare", "--matrix", str("m.tsv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("\n1\ta,b\n"), std::string::npos) << r.out;
}

TEST_F(CliTest, CompareRefusesBadInputs) {
  write("one.tsv", "instance\ta\tb\ni0\t0.5\t0.4\n");
  const auto one = rf({"compare", "--matrix", str("one.tsv")});
  EXPECT_NE(one.code, 0);
  EXPECT_NE(one.err.find("N >= 2"), std::string::npos) << one.err;
  write("ragged.tsv", "instance\ta\tb\ni0\t0.5\t0.4\ni1\t0.3\n");
  EXPECT_EQ(rf({"compare", "--matrix", str("ragged.tsv")}).code, cli::kExitData);
  write("ok.tsv", "instance\ta\tb\ni0\t0.5\t0.4\ni1\t0.3\t0.2\n");
  EXPECT_EQ(rf({"compare", "--matrix", str("ok.tsv"), "--alpha", "0.01"}).code, cli::kExitUsage);
}

TEST_F(CliTest, GradcheckAllObjectives) {
  for (const char* objective : {"bce", "hinge", "infonce", "margin_mse", "distill_ranknet", "adr_mse"}) {
    const auto r = rf({"gradcheck", "--objective", objective, "--n", "8", "--trials", "100"});
    EXPECT_EQ(r.code, cli::kExitOk) << objective << "\n" << r.out << r.err;
    EXPECT_NE(r.out.find("\tpass\n"), std::string::npos) << objective;
  }
}

TEST_F(CliTest, GradcheckNegativeControlAndEdges) {
  EXPECT_EQ(rf({"gradcheck", "--objective", "infonce", "--n", "8", "--break-gradient"}).code, cli::kExitNumerical);
  EXPECT_EQ(rf({"gradcheck", "--objective", "adr_mse", "--n", "1"}).code, cli::kExitOk);
  EXPECT_EQ(rf({"gradcheck", "--objective", "infonce", "--n", "1"}).code, cli::kExitUsage);
  const auto unknown = rf({"gradcheck", "--objective", "lambda_rank"});
  EXPECT_EQ(unknown.code, cli::kExitUsage);
  EXPECT_NE(unknown.err.find("lambda_rank"), std::string::npos);
}

TEST_F(CliTest, RecordsFormatEmitsJsonLines) {
  const auto r = rf({"--format", "records", "gradcheck", "--objective", "hinge", "--n", "4", "--trials", "5"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.front(), '{');
  EXPECT_NE(r.out.find("\"pass\":true"), std::string::npos) << r.out;
}
