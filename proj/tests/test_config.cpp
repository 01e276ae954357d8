#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "rankforge/config.hpp"
#include "rankforge/error.hpp"

using namespace rankforge;

namespace {

const char* kFileData = R"(
data:
  features: train.features.tsv
  qrels: train.qrels
  triplets: train.triplets.tsv
  validation_features: val.features.tsv
  validation_qrels: val.qrels
)";

std::string minimal(const std::string& extra = "") { return "objective: margin_mse\n" + extra + kFileData; }

std::string config_error_key(const std::string& yaml) {
  try {
    parse_config(yaml, "/tmp", false);
  } catch (const ConfigError& e) {
    return e.key();
  }
  ADD_FAILURE() << "expected ConfigError";
  return {};
}

}  // namespace

TEST(Config, MinimalDefaults) {
  const auto cfg = parse_config(minimal(), "/data", false);
  EXPECT_EQ(cfg.objective, Objective::kMarginMse);
  EXPECT_EQ(cfg.optimizer.epsilon, 1e-8);
  EXPECT_EQ(cfg.optimizer.warmup_steps, 5000u);
  EXPECT_EQ(cfg.optimizer.max_steps, 200000u);
  EXPECT_EQ(cfg.optimizer.learning_rate, 1e-5);
  EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{0, 1, 2}));
  EXPECT_EQ(cfg.sampling.negatives, 7u);
  EXPECT_EQ(cfg.sampling.list_depth, 50u);
  EXPECT_EQ(cfg.data.positive_threshold, 1);
  EXPECT_EQ(cfg.resolve(cfg.data.qrels), std::filesystem::path("/data/train.qrels"));
  EXPECT_EQ(cfg.resolve("/abs/q"), std::filesystem::path("/abs/q"));
}

TEST(Config, UnknownObjective) {
  EXPECT_EQ(config_error_key("objective: lambda_rank\n" + std::string(kFileData)), "objective");
}

TEST(Config, NegativeLearningRateNamesKey) {
  EXPECT_EQ(config_error_key(minimal("optimizer: {learning_rate: -1.0e-5}\n")), "optimizer.learning_rate");
}

TEST(Config, NonPositiveTemperatureNamesKey) {
  EXPECT_EQ(config_error_key(minimal("loss: {temperature: 0}\n")), "loss.temperature");
  EXPECT_EQ(config_error_key(minimal("loss: {margin: -1}\n")), "loss.margin");
}

TEST(Config, UnknownKeysAreRejected) {
  EXPECT_EQ(config_error_key(minimal("optimiser: {learning_rate: 1}\n")), "optimiser");
  EXPECT_EQ(config_error_key(minimal("optimizer: {learning_rat: 1}\n")), "optimizer.learning_rat");
  EXPECT_EQ(config_error_key("objective: bce\ndata: {planted: {sed: 1}}\n"), "data.planted.sed");
}

TEST(Config, MissingRequiredKeys) {
  EXPECT_EQ(config_error_key("data: {planted: {}}\n"), "objective");
  EXPECT_EQ(config_error_key("objective: bce\n"), "data");
  EXPECT_EQ(config_error_key("objective: bce\ndata: {features: a, validation_features: b, validation_qrels: c}\n"),
            "data.qrels");
  EXPECT_EQ(config_error_key("objective: margin_mse\ndata: {features: a, qrels: q, validation_features: b, "
                             "validation_qrels: c}\n"),
            "data.triplets");
  EXPECT_EQ(config_error_key("objective: adr_mse\ndata: {features: a, qrels: q, validation_features: b, "
                             "validation_qrels: c}\n"),
            "data.ranked_lists");
}

TEST(Config, TypeErrorsNameKey) {
  EXPECT_EQ(config_error_key(minimal("optimizer: {batch_docs: many}\n")), "optimizer.batch_docs");
  EXPECT_EQ(config_error_key(minimal("seeds: [0, x]\n")), "seeds[1]");
  EXPECT_EQ(config_error_key(minimal("metrics: [ndcg]\n")), "metrics[0]");
  EXPECT_EQ(config_error_key("objective: [bce\n"), "<document>");
}

TEST(Config, MissingFileNamesKey) {
  const auto dir = std::filesystem::temp_directory_path() / "rankforge_config_test";
  std::filesystem::create_directories(dir);
  for (const char* name : {"train.features.tsv", "train.triplets.tsv", "val.features.tsv", "val.qrels"}) {
    std::ofstream(dir / name) << "";
  }
  try {
    parse_config(minimal(), dir, true);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "data.qrels");
    EXPECT_NE(std::string(e.what()).find("train.qrels"), std::string::npos);
  }
  std::ofstream(dir / "train.qrels") << "";
  EXPECT_NO_THROW(parse_config(minimal(), dir, true));
  std::filesystem::remove_all(dir);
}

TEST(Config, PlantedExcludesFileKeys) {
  const auto cfg = parse_config("objective: infonce\ndata: {planted: {seed: 7, train_queries: 20}}\n", "/tmp");
  ASSERT_TRUE(cfg.data.planted.has_value());
  EXPECT_EQ(cfg.data.planted->seed, 7u);
  EXPECT_EQ(cfg.data.planted->train_queries, 20u);
  EXPECT_EQ(config_error_key("objective: bce\ndata: {planted: {}, qrels: q}\n"), "data.qrels");
}

TEST(Config, MetricSpecParsing) {
  EXPECT_EQ(MetricSpec::parse("recall@1000").cutoff, 1000u);
  EXPECT_EQ(MetricSpec::parse("mrr@10").label(), "mrr@10");
  EXPECT_THROW(MetricSpec::parse("ndcg@0"), InvalidInput);
  EXPECT_THROW(MetricSpec::parse("map@10"), InvalidInput);
  EXPECT_THROW(MetricSpec::parse("ndcg@"), InvalidInput);
}

TEST(Config, HashIsStableAndSensitive) {
  const auto a = parse_config(minimal(), "/one", false);
  const auto b = parse_config(minimal(), "/two", false);
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  const auto c = parse_config(minimal("optimizer: {learning_rate: 2.0e-5}\n"), "/one", false);
  EXPECT_NE(config_hash(a), config_hash(c));
  // The same settings written differently hash the same.
  const auto d = parse_config(minimal("optimizer: {learning_rate: 0.00001}\nseeds: [0, 1, 2]\n"), "/one", false);
  EXPECT_EQ(config_hash(a), config_hash(d));
  EXPECT_EQ(canonical_config(a), canonical_config(d));
}

TEST(Config, BundledConfigsLoad) {
  for (const char* name : {"smoke.yaml", "planted.yaml"}) {
    const auto cfg = load_config(std::filesystem::path(RANKFORGE_CONFIG_DIR) / name);
    EXPECT_TRUE(cfg.data.planted.has_value()) << name;
    EXPECT_EQ(cfg.seeds.size(), 3u) << name;
  }
  EXPECT_THROW(load_config(std::filesystem::path(RANKFORGE_CONFIG_DIR) / "absent.yaml"), ConfigError);
}
