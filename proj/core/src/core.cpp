#include "rankforge/core.hpp"

#include <cmath>
#include <unordered_set>

#include "rankforge/error.hpp"

namespace rankforge {

ScoredList::ScoredList(std::string query_id, std::vector<std::string> passage_ids,
                       std::vector<double> scores, std::optional<std::vector<int>> labels)
    : query_id_(std::move(query_id)),
      passage_ids_(std::move(passage_ids)),
      scores_(std::move(scores)),
      labels_(std::move(labels)) {
  if (scores_.empty()) throw InvalidInput("ScoredList '" + query_id_ + "' is empty");
  if (passage_ids_.size() != scores_.size()) {
    throw InvalidInput("ScoredList '" + query_id_ + "': " + std::to_string(passage_ids_.size()) +
                       " passage ids but " + std::to_string(scores_.size()) + " scores");
  }
  if (labels_ && labels_->size() != scores_.size()) {
    throw InvalidInput("ScoredList '" + query_id_ + "': " + std::to_string(labels_->size()) +
                       " labels but " + std::to_string(scores_.size()) + " scores");
  }
  if (labels_) {
    for (int y : *labels_) {
      if (y != 0 && y != 1) throw InvalidInput("ScoredList '" + query_id_ + "': labels must be 0 or 1");
    }
  }
  std::unordered_set<std::string_view> seen;
  seen.reserve(passage_ids_.size());
  for (const auto& id : passage_ids_) {
    if (!seen.insert(id).second) {
      throw InvalidInput("ScoredList '" + query_id_ + "': duplicate passage id '" + id + "'");
    }
  }
}

const std::vector<int>& ScoredList::labels() const {
  if (!labels_) throw InvalidInput("ScoredList '" + query_id_ + "' has no labels");
  return *labels_;
}

void DistillTriplet::validate() const {
  if (pos_id == neg_id) {
    throw InvalidInput("triplet for query '" + query_id + "': positive and negative are both '" +
                       pos_id + "'");
  }
  if (!std::isfinite(teacher_pos) || !std::isfinite(teacher_neg)) {
    throw InvalidInput("triplet for query '" + query_id + "': non-finite teacher score");
  }
}

TeacherRanking::TeacherRanking(std::string query_id, std::vector<std::string> ordered_ids)
    : query_id_(std::move(query_id)), ordered_ids_(std::move(ordered_ids)) {
  rank_.reserve(ordered_ids_.size());
  for (std::size_t k = 0; k < ordered_ids_.size(); ++k) {
    if (!rank_.emplace(ordered_ids_[k], k + 1).second) {
      throw InvalidInput("ranking for query '" + query_id_ + "': duplicate passage id '" +
                         ordered_ids_[k] + "'");
    }
  }
}

std::size_t TeacherRanking::rank_of(const std::string& passage_id) const {
  auto it = rank_.find(passage_id);
  if (it == rank_.end()) {
    throw InvalidInput("passage '" + passage_id + "' is not in the ranking for '" + query_id_ + "'");
  }
  return it->second;
}

bool JudgedPool::set(const std::string& query_id, const std::string& passage_id, int grade) {
  if (grade < 0) throw InvalidInput("negative relevance grade for " + query_id + "/" + passage_id);
  auto [it, inserted] = pool_[query_id].insert_or_assign(passage_id, grade);
  return !inserted;
}

const JudgedPool::Judgments* JudgedPool::find(const std::string& query_id) const {
  auto it = pool_.find(query_id);
  return it == pool_.end() ? nullptr : &it->second;
}

int JudgedPool::grade(const std::string& query_id, const std::string& passage_id) const {
  const Judgments* j = find(query_id);
  if (j == nullptr) return 0;
  auto it = j->find(passage_id);
  return it == j->end() ? 0 : it->second;
}

int JudgedPool::binary_label(const std::string& query_id, const std::string& passage_id,
                             int positive_threshold) const {
  return grade(query_id, passage_id) >= positive_threshold ? 1 : 0;
}

RankMatrix::RankMatrix(std::vector<std::string> method_names, std::vector<std::string> instance_names,
                       std::vector<std::vector<double>> values)
    : method_names_(std::move(method_names)),
      instance_names_(std::move(instance_names)),
      values_(std::move(values)) {
  if (values_.size() != instance_names_.size()) {
    throw InvalidInput("rank matrix has " + std::to_string(values_.size()) + " rows but " +
                       std::to_string(instance_names_.size()) + " instance names");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i].size() != method_names_.size()) {
      throw InvalidInput("rank matrix row " + std::to_string(i + 1) + " ('" + instance_names_[i] +
                         "') has " + std::to_string(values_[i].size()) + " values, expected " +
                         std::to_string(method_names_.size()));
    }
    for (double v : values_[i]) {
      if (!std::isfinite(v)) {
        throw InvalidInput("rank matrix row '" + instance_names_[i] + "' has a non-finite value");
      }
    }
  }
}

void LossConfig::validate() const {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw InvalidConfig("temperature must be positive, got " + std::to_string(temperature));
  }
  if (!(margin > 0.0) || !std::isfinite(margin)) {
    throw InvalidConfig("hinge margin must be positive, got " + std::to_string(margin));
  }
}

}  // namespace rankforge
