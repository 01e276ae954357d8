#pragma once

// Training loop: per-objective batch sampling, per-document loss
// normalization, AdamW updates, and periodic validation with best-checkpoint
// selection.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "rankforge/config.hpp"
#include "rankforge/core.hpp"
#include "rankforge/dataset.hpp"
#include "rankforge/metrics.hpp"
#include "rankforge/optim.hpp"
#include "rankforge/planted.hpp"
#include "rankforge/scorer.hpp"

namespace rankforge {

struct TrainingData {
  FeatureTable features;
  JudgedPool qrels;
  std::vector<DistillTriplet> triplets;  // margin_mse
  std::vector<TeacherRanking> rankings;  // distill_ranknet, adr_mse
  int positive_threshold = kDefaultPositiveThreshold;
};

/// Held-out queries scored with nDCG@cutoff as the checkpoint-selection proxy.
struct ValidationSet {
  FeatureTable features;
  JudgedPool qrels;
};

struct ExperimentData {
  TrainingData train;
  ValidationSet validation;
  std::optional<PlantedProblem> planted;  // set when the config asks for a planted problem
};

/// Reads the files named in `config.data`, or generates the planted problem.
ExperimentData load_experiment_data(const ExperimentConfig& config);

struct BestCheckpoint {
  ScorerParams params;
  double validation_score = 0.0;
  std::size_t step = 0;
};

struct ValidationRecord {
  std::size_t step = 0;
  double train_loss = 0.0;
  double validation_score = 0.0;
  bool is_best = false;
};

struct TrainState {
  ScorerParams params;
  OptimizerState opt;
  BestCheckpoint best;
  std::uint64_t seed = 0;
  std::vector<ValidationRecord> history;
};

/// Functional form of one AdamW update on the state's parameters.
TrainState adamw_step(TrainState state, std::span<const double> grad);

/// Sum of values over total documents; gradients scaled by the same factor and
/// concatenated in input order. grad sizes must equal the document counts.
LossOutput normalize_batch_loss(std::span<const LossOutput> per_query, std::span<const std::size_t> docs_per_query);

/// Scores every candidate of every query in the table.
Run score_run(const ScorerParams& params, const FeatureTable& features);

/// Mean nDCG@cutoff of `params` on the validation queries.
double validation_score(const ScorerParams& params, const ValidationSet& validation, std::size_t cutoff);

/// Trains one seed. Writes one tab-separated line per validation to `log`
/// (after a header). Throws DivergedRun on a non-finite loss or gradient.
TrainState train(const ExperimentConfig& config, const TrainingData& data, const ValidationSet& validation,
                 std::uint64_t seed, std::ostream* log = nullptr);

}  // namespace rankforge
