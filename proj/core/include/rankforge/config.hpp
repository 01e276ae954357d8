#pragma once

// Declarative experiment configuration. One YAML document per experiment;
// unknown keys anywhere are rejected. Relative data paths resolve against the
// directory of the config file.
//
//   objective: margin_mse            # required
//   seeds: [0, 1, 2]
//   loss:       {temperature: 1.0, margin: 1.0}
//   scorer:     {kind: linear, input_dim: 16, hidden_width: 0}
//   optimizer:  {learning_rate: 1.0e-5, batch_docs: 32, warmup_steps: 5000,
//                max_steps: 200000, weight_decay: 0.0, beta1: 0.9,
//                beta2: 0.999, epsilon: 1.0e-8}
//   sampling:   {negatives: 7, list_depth: 50}
//   validation: {every: 1000, cutoff: 10}
//   metrics:    [ndcg@10, recall@1000, mrr@10]
//   data:
//     features: train.features.tsv
//     qrels: train.qrels
//     triplets: train.triplets.tsv          # margin_mse
//     ranked_lists: train.lists.tsv         # distill_ranknet, adr_mse
//     validation_features: val.features.tsv
//     validation_qrels: val.qrels
//     positive_threshold: 1
//   # or, instead of the file keys:
//   #   planted: {input_dim: 16, train_queries: 500, ..., seed: 2024}

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rankforge/core.hpp"
#include "rankforge/losses.hpp"
#include "rankforge/optim.hpp"
#include "rankforge/planted.hpp"
#include "rankforge/scorer.hpp"

namespace rankforge {

struct ScorerSpec {
  ScorerKind kind = ScorerKind::kLinear;
  std::size_t input_dim = 0;  // 0: take it from the data
  std::size_t hidden_width = 0;
};

struct SamplingConfig {
  std::size_t negatives = 7;    // infonce: 1 positive + this many negatives
  std::size_t list_depth = 50;  // listwise objectives use the top list_depth teacher ids
};

struct ValidationConfig {
  std::size_t every = 1000;  // steps between validations
  std::size_t cutoff = 10;   // nDCG@cutoff on the validation queries
};

/// A metric name with cutoff, e.g. "ndcg@10".
struct MetricSpec {
  std::string name;  // ndcg | recall | mrr
  std::size_t cutoff = 10;

  std::string label() const { return name + "@" + std::to_string(cutoff); }
  /// Throws InvalidInput for anything but ndcg@k, recall@k, mrr@k with k >= 1.
  static MetricSpec parse(std::string_view text);
};

struct DataConfig {
  // Paths as written in the config; resolve with ExperimentConfig::resolve.
  std::string features;
  std::string qrels;
  std::string triplets;
  std::string ranked_lists;
  std::string validation_features;
  std::string validation_qrels;
  int positive_threshold = kDefaultPositiveThreshold;
  std::optional<PlantedSpec> planted;
};

struct ExperimentConfig {
  Objective objective = Objective::kMarginMse;
  LossConfig loss;
  ScorerSpec scorer;
  OptimizerConfig optimizer;
  SamplingConfig sampling;
  ValidationConfig validation;
  std::vector<MetricSpec> metrics = {MetricSpec{"ndcg", 10}};
  DataConfig data;
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::string& path) const;
  /// Throws ConfigError naming the first inconsistent key.
  void validate() const;
};

/// Parses a YAML document. With `check_paths`, every referenced file must exist.
ExperimentConfig parse_config(std::string_view yaml_text, const std::filesystem::path& base_dir,
                              bool check_paths = true);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Stable textual form of every setting (paths as written, base_dir excluded).
std::string canonical_config(const ExperimentConfig& config);
/// 16 hex digits of FNV-1a 64 over canonical_config.
std::string config_hash(const ExperimentConfig& config);

}  // namespace rankforge
