#pragma once

// Domain types shared by every rankforge module. All of them validate on
// construction and are immutable afterwards.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace rankforge {

/// Relevance grade at or above which a judged passage counts as positive.
/// TREC-DL uses grades 0-3; both >= 1 and >= 2 are in common use.
inline constexpr int kDefaultPositiveThreshold = 1;

/// One query's candidate passages with student scores s_i and optional
/// binary labels y_i.
class ScoredList {
 public:
  ScoredList(std::string query_id, std::vector<std::string> passage_ids,
             std::vector<double> scores,
             std::optional<std::vector<int>> labels = std::nullopt);

  const std::string& query_id() const noexcept { return query_id_; }
  const std::vector<std::string>& passage_ids() const noexcept { return passage_ids_; }
  const std::vector<double>& scores() const noexcept { return scores_; }
  bool has_labels() const noexcept { return labels_.has_value(); }
  /// Throws InvalidInput when the list is unlabeled.
  const std::vector<int>& labels() const;
  std::size_t size() const noexcept { return scores_.size(); }

 private:
  std::string query_id_;
  std::vector<std::string> passage_ids_;
  std::vector<double> scores_;
  std::optional<std::vector<int>> labels_;
};

/// (query, positive, negative) with the teacher's score for both passages.
struct DistillTriplet {
  std::string query_id;
  std::string pos_id;
  std::string neg_id;
  double teacher_pos = 0.0;
  double teacher_neg = 0.0;

  /// Throws InvalidInput if pos_id == neg_id or a teacher score is not finite.
  void validate() const;
  double teacher_margin() const noexcept { return teacher_pos - teacher_neg; }
};

/// A teacher-ordered candidate list, best first. Teacher rank of
/// ordered_ids()[k] is k + 1.
class TeacherRanking {
 public:
  TeacherRanking(std::string query_id, std::vector<std::string> ordered_ids);

  const std::string& query_id() const noexcept { return query_id_; }
  const std::vector<std::string>& ordered_ids() const noexcept { return ordered_ids_; }
  std::size_t size() const noexcept { return ordered_ids_.size(); }
  /// 1-based teacher rank; throws InvalidInput for an id not in the list.
  std::size_t rank_of(const std::string& passage_id) const;

 private:
  std::string query_id_;
  std::vector<std::string> ordered_ids_;
  std::unordered_map<std::string, std::size_t> rank_;
};

/// Graded relevance judgments (qrels): query -> passage -> grade >= 0.
class JudgedPool {
 public:
  using Judgments = std::map<std::string, int>;

  JudgedPool() = default;

  /// Inserts or overwrites a judgment. Returns true if it overwrote one.
  bool set(const std::string& query_id, const std::string& passage_id, int grade);

  /// nullptr when the query has no judgments.
  const Judgments* find(const std::string& query_id) const;
  /// Unjudged passages have grade 0.
  int grade(const std::string& query_id, const std::string& passage_id) const;
  int binary_label(const std::string& query_id, const std::string& passage_id,
                   int positive_threshold = kDefaultPositiveThreshold) const;

  const std::map<std::string, Judgments>& queries() const noexcept { return pool_; }
  bool empty() const noexcept { return pool_.empty(); }
  std::size_t num_queries() const noexcept { return pool_.size(); }

 private:
  std::map<std::string, Judgments> pool_;
};

/// A loss value together with dL/ds_i, aligned with the input scores.
struct LossOutput {
  double value = 0.0;
  std::vector<double> grad;
};

/// methods x instances grid of per-instance scores.
class RankMatrix {
 public:
  /// `values[i][j]` is method j's score on instance i.
  RankMatrix(std::vector<std::string> method_names, std::vector<std::string> instance_names,
             std::vector<std::vector<double>> values);

  std::size_t num_methods() const noexcept { return method_names_.size(); }
  std::size_t num_instances() const noexcept { return instance_names_.size(); }
  const std::vector<std::string>& method_names() const noexcept { return method_names_; }
  const std::vector<std::string>& instance_names() const noexcept { return instance_names_; }
  std::span<const double> row(std::size_t instance) const { return values_.at(instance); }
  const std::vector<std::vector<double>>& values() const noexcept { return values_; }

 private:
  std::vector<std::string> method_names_;
  std::vector<std::string> instance_names_;
  std::vector<std::vector<double>> values_;
};

struct LossConfig {
  double temperature = 1.0;  // soft-rank T
  double margin = 1.0;       // hinge margin

  /// Throws InvalidConfig unless T > 0 and margin > 0 (both finite).
  void validate() const;
};

}  // namespace rankforge
