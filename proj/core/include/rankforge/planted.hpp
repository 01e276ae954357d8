#pragma once

// Synthetic "planted relevance" problems: a hidden linear teacher scores
// Gaussian candidate features, and every supervision signal (grades,
// teacher triplets, teacher rankings) is derived from it, so the recovery
// of the teacher by a trained student can be measured exactly.
//
// Each query also carries an offset a_q * u added to all of its candidates,
// with u a fixed unit direction at a chosen angle to the teacher. The offset
// never changes the within-query order, but it moves absolute scores from
// query to query the way query difficulty does in real collections.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rankforge/core.hpp"
#include "rankforge/dataset.hpp"
#include "rankforge/scorer.hpp"

namespace rankforge {

struct PlantedSpec {
  std::size_t input_dim = 16;
  std::size_t train_queries = 500;
  std::size_t validation_queries = 100;
  std::size_t test_queries = 100;
  std::size_t candidates_per_query = 20;
  /// Euclidean norm of the teacher weight vector.
  double teacher_norm = 2.0;
  /// Standard deviation of the per-query offset a_q.
  double query_shift_scale = 3.0;
  /// Cosine between the offset direction u and the teacher weights.
  double shift_alignment = 0.4;
  /// Grade thresholds by teacher rank: rank <= grade3_depth gets 3, and so on.
  std::size_t grade3_depth = 1;
  std::size_t grade2_depth = 3;
  std::size_t grade1_depth = 5;
  /// Teacher-scored (positive, negative) triplets drawn per training query.
  std::size_t triplets_per_query = 10;
  std::uint64_t seed = 2024;

  void validate() const;
};

/// One split of a planted problem. `teacher_scores` is aligned with
/// `features.queries()` and their passage order.
struct PlantedSplit {
  FeatureTable features;
  JudgedPool qrels;
  std::vector<std::vector<double>> teacher_scores;
};

struct PlantedProblem {
  ScorerParams teacher;  // linear, zero bias
  PlantedSplit train;
  PlantedSplit validation;
  PlantedSplit test;
  std::vector<DistillTriplet> triplets;      // from train
  std::vector<TeacherRanking> rankings;      // full teacher order of every train query
};

PlantedProblem generate_planted(const PlantedSpec& spec);

/// Mean over the split's queries of Kendall tau-b between student and teacher scores.
double teacher_agreement(const ScorerParams& student, const PlantedSplit& split);

}  // namespace rankforge
