#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "rankforge/scorer.hpp"

namespace rankforge {

/// Candidate passages of one query, in insertion order.
struct QueryCandidates {
  std::string query_id;
  std::vector<std::string> passage_ids;
  std::vector<FeatureVector> features;
};

/// Feature vectors keyed by (query, passage); every vector has the same dimension.
class FeatureTable {
 public:
  /// Throws InvalidInput on a duplicate (query, passage), a dimension change,
  /// or a non-finite entry.
  void add(const std::string& query_id, const std::string& passage_id, FeatureVector features);

  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return queries_.empty(); }
  std::size_t num_queries() const noexcept { return queries_.size(); }
  std::size_t num_rows() const noexcept { return rows_; }
  const std::vector<QueryCandidates>& queries() const noexcept { return queries_; }

  const QueryCandidates* find(const std::string& query_id) const;
  /// Throws InvalidInput when the pair is missing.
  const FeatureVector& at(const std::string& query_id, const std::string& passage_id) const;

 private:
  std::size_t dim_ = 0;
  std::size_t rows_ = 0;
  std::vector<QueryCandidates> queries_;
  std::unordered_map<std::string, std::size_t> query_index_;
  std::vector<std::unordered_map<std::string, std::size_t>> passage_index_;
};

}  // namespace rankforge
