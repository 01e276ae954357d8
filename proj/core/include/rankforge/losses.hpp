#pragma once

// Training objectives for pointwise re-rankers. Each function returns the
// loss value and its analytic gradient with respect to the student scores.
//
// Two formulas are implemented in their corrected form:
//  * distill_ranknet penalises softplus(s_j - s_i) for every pair where i is
//    ranked above j by the teacher, so perfect agreement minimises the loss
//    (plain RankNet with teacher-derived pairs).
//  * soft_rank computes r_i = 1 + sum_{j != i} sigmoid((s_j - s_i) / T), the
//    reading under which the best score approaches rank 1 and the ranks sum
//    to n(n+1)/2.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rankforge/core.hpp"

namespace rankforge {

enum class Objective { kBce, kHinge, kInfoNce, kMarginMse, kDistillRankNet, kAdrMse };

inline constexpr std::array<Objective, 6> kAllObjectives = {
    Objective::kBce,       Objective::kHinge,          Objective::kInfoNce,
    Objective::kMarginMse, Objective::kDistillRankNet, Objective::kAdrMse};

/// Canonical identifier: bce, hinge, infonce, margin_mse, distill_ranknet, adr_mse.
std::string_view objective_name(Objective objective) noexcept;
std::optional<Objective> parse_objective(std::string_view name) noexcept;

// Numerically stable scalar helpers.
double sigmoid(double x) noexcept;
/// log(1 + e^x) without overflow.
double softplus(double x) noexcept;

LossOutput bce_pair(double s_pos, double s_neg);
LossOutput hinge_pair(double s_pos, double s_neg, const LossConfig& cfg = {});
/// Requires labels with at least one positive.
LossOutput info_nce(const ScoredList& list);
LossOutput margin_mse(const DistillTriplet& triplet, double s_pos, double s_neg);
/// `scores` holds the student scores reordered so that position i is the
/// teacher's rank-(i+1) passage. Requires n >= 2.
LossOutput distill_ranknet(std::span<const double> scores);
std::vector<double> soft_rank(std::span<const double> scores, const LossConfig& cfg = {});
/// Scores in teacher order; weight of position i (1-based) is 1 / log2(i + 1).
LossOutput adr_mse(std::span<const double> scores, const LossConfig& cfg = {});

// Batch shapes accepted by loss_by_name.

/// Unlabeled (positive, negative) score pair: bce, hinge.
struct ScorePair {
  double s_pos = 0.0;
  double s_neg = 0.0;
};

/// Teacher-scored triplet with the student's scores: margin_mse.
struct TripletScores {
  DistillTriplet triplet;
  double s_pos = 0.0;
  double s_neg = 0.0;
};

/// Student scores already in teacher order: distill_ranknet, adr_mse.
struct TeacherOrderedScores {
  std::vector<double> scores;
};

/// A ScoredList with labels feeds infonce.
using TrainingBatch = std::variant<ScorePair, TripletScores, ScoredList, TeacherOrderedScores>;

std::string_view batch_shape_name(const TrainingBatch& batch) noexcept;

LossOutput compute_loss(Objective objective, const TrainingBatch& batch, const LossConfig& cfg = {});
/// Throws DispatchError for an unknown name or a batch of the wrong shape.
LossOutput loss_by_name(std::string_view name, const TrainingBatch& batch, const LossConfig& cfg = {});

}  // namespace rankforge
