#include "rankforge/dataset.hpp"

#include <cmath>

#include "rankforge/error.hpp"

namespace rankforge {

void FeatureTable::add(const std::string& query_id, const std::string& passage_id,
                       FeatureVector features) {
  if (features.empty()) throw InvalidInput("empty feature vector for " + query_id + "/" + passage_id);
  if (dim_ == 0) {
    dim_ = features.size();
  } else if (features.size() != dim_) {
    throw InvalidInput("feature vector for " + query_id + "/" + passage_id + " has dimension " +
                       std::to_string(features.size()) + ", expected " + std::to_string(dim_));
  }
  for (double v : features) {
    if (!std::isfinite(v)) throw InvalidInput("non-finite feature for " + query_id + "/" + passage_id);
  }

  auto [qit, new_query] = query_index_.try_emplace(query_id, queries_.size());
  if (new_query) {
    queries_.push_back(QueryCandidates{query_id, {}, {}});
    passage_index_.emplace_back();
  }
  const std::size_t qi = qit->second;
  auto& index = passage_index_[qi];
  if (!index.emplace(passage_id, queries_[qi].passage_ids.size()).second) {
    throw InvalidInput("duplicate features for " + query_id + "/" + passage_id);
  }
  queries_[qi].passage_ids.push_back(passage_id);
  queries_[qi].features.push_back(std::move(features));
  ++rows_;
}

const QueryCandidates* FeatureTable::find(const std::string& query_id) const {
  auto it = query_index_.find(query_id);
  return it == query_index_.end() ? nullptr : &queries_[it->second];
}

const FeatureVector& FeatureTable::at(const std::string& query_id,
                                      const std::string& passage_id) const {
  auto qit = query_index_.find(query_id);
  if (qit != query_index_.end()) {
    const auto& index = passage_index_[qit->second];
    auto pit = index.find(passage_id);
    if (pit != index.end()) return queries_[qit->second].features[pit->second];
  }
  throw InvalidInput("no features for " + query_id + "/" + passage_id);
}

}  // namespace rankforge
