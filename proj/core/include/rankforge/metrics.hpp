#pragma once

// Ranking evaluation: nDCG@k, Recall@k and MRR@k over a run (one ScoredList
// per query) against graded judgments.
//
// Before any metric is computed each list is ordered by descending score,
// ties broken by ascending passage id, so results do not depend on the input
// order. Queries with nothing relevant (IDCG = 0, or no passage at or above
// the threshold) are left out of the mean and counted in `num_excluded`.
// Only queries present in the run are evaluated.

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rankforge/core.hpp"

namespace rankforge {

using Run = std::vector<ScoredList>;

enum class GainKind {
  kExponential,  // 2^rel - 1 (TREC-DL convention)
  kLinear,       // rel
};

struct MetricReport {
  std::string metric;  // "ndcg", "recall", "mrr"
  std::size_t cutoff = 0;
  std::map<std::string, double> per_query;
  double mean = 0.0;  // 0 when no query qualifies
  std::size_t num_queries = 0;
  std::size_t num_excluded = 0;

  /// e.g. "ndcg@10"
  std::string label() const;
};

/// Indices of `list` in evaluation order (score desc, passage id asc).
std::vector<std::size_t> evaluation_order(const ScoredList& list);

MetricReport ndcg_at_k(const Run& run, const JudgedPool& qrels, std::size_t k,
                       GainKind gain = GainKind::kExponential);
MetricReport recall_at_k(const Run& run, const JudgedPool& qrels, std::size_t k,
                         int positive_threshold = kDefaultPositiveThreshold);
MetricReport mrr_at_k(const Run& run, const JudgedPool& qrels, std::size_t k,
                      int positive_threshold = kDefaultPositiveThreshold);

/// Kendall tau-b between two score vectors over the same items.
double kendall_tau(std::span<const double> a, std::span<const double> b);

}  // namespace rankforge
