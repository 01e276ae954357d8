#include "rankforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "rankforge/error.hpp"

namespace rankforge {
namespace {

void require_cutoff(std::size_t k) {
  if (k < 1) throw InvalidInput("metric cutoff k must be at least 1");
}

double gain_of(int grade, GainKind gain) {
  if (grade <= 0) return 0.0;
  return gain == GainKind::kExponential ? std::exp2(static_cast<double>(grade)) - 1.0
                                        : static_cast<double>(grade);
}

// Fills per_query / mean / counts using `per_query_fn`, which returns false to
// exclude a query.
template <typename Fn>
MetricReport evaluate(std::string metric, std::size_t k, const Run& run, Fn&& per_query_fn) {
  require_cutoff(k);
  MetricReport report;
  report.metric = std::move(metric);
  report.cutoff = k;
  for (const auto& list : run) {
    double value = 0.0;
    if (per_query_fn(list, value)) {
      report.per_query[list.query_id()] = value;
    } else {
      ++report.num_excluded;
    }
  }
  report.num_queries = report.per_query.size();
  if (report.num_queries > 0) {
    double sum = 0.0;
    for (const auto& [qid, v] : report.per_query) sum += v;
    report.mean = sum / static_cast<double>(report.num_queries);
  }
  return report;
}

std::size_t count_relevant(const JudgedPool::Judgments& judged, int threshold) {
  std::size_t n = 0;
  for (const auto& [pid, grade] : judged) n += grade >= threshold ? 1 : 0;
  return n;
}

}  // namespace

std::string MetricReport::label() const { return metric + "@" + std::to_string(cutoff); }

std::vector<std::size_t> evaluation_order(const ScoredList& list) {
  std::vector<std::size_t> order(list.size());
  std::iota(order.begin(), order.end(), 0);
  const auto& s = list.scores();
  const auto& ids = list.passage_ids();
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (s[a] != s[b]) return s[a] > s[b];
    return ids[a] < ids[b];
  });
  return order;
}

MetricReport ndcg_at_k(const Run& run, const JudgedPool& qrels, std::size_t k, GainKind gain) {
  return evaluate("ndcg", k, run, [&](const ScoredList& list, double& out) {
    const auto* judged = qrels.find(list.query_id());
    if (judged == nullptr) return false;

    std::vector<int> ideal;
    ideal.reserve(judged->size());
    for (const auto& [pid, grade] : *judged) ideal.push_back(grade);
    std::sort(ideal.begin(), ideal.end(), std::greater<>());
    double idcg = 0.0;
    for (std::size_t i = 0; i < std::min(k, ideal.size()); ++i) {
      idcg += gain_of(ideal[i], gain) / std::log2(static_cast<double>(i) + 2.0);
    }
    if (idcg <= 0.0) return false;

    const auto order = evaluation_order(list);
    double dcg = 0.0;
    for (std::size_t i = 0; i < std::min(k, order.size()); ++i) {
      auto it = judged->find(list.passage_ids()[order[i]]);
      const int grade = it == judged->end() ? 0 : it->second;
      dcg += gain_of(grade, gain) / std::log2(static_cast<double>(i) + 2.0);
    }
    out = dcg / idcg;
    return true;
  });
}

MetricReport recall_at_k(const Run& run, const JudgedPool& qrels, std::size_t k,
                         int positive_threshold) {
  return evaluate("recall", k, run, [&](const ScoredList& list, double& out) {
    const auto* judged = qrels.find(list.query_id());
    if (judged == nullptr) return false;
    const std::size_t relevant = count_relevant(*judged, positive_threshold);
    if (relevant == 0) return false;

    const auto order = evaluation_order(list);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < std::min(k, order.size()); ++i) {
      auto it = judged->find(list.passage_ids()[order[i]]);
      if (it != judged->end() && it->second >= positive_threshold) ++hits;
    }
    out = static_cast<double>(hits) / static_cast<double>(relevant);
    return true;
  });
}

MetricReport mrr_at_k(const Run& run, const JudgedPool& qrels, std::size_t k,
                      int positive_threshold) {
  return evaluate("mrr", k, run, [&](const ScoredList& list, double& out) {
    const auto* judged = qrels.find(list.query_id());
    if (judged == nullptr || count_relevant(*judged, positive_threshold) == 0) return false;

    const auto order = evaluation_order(list);
    out = 0.0;
    for (std::size_t i = 0; i < std::min(k, order.size()); ++i) {
      auto it = judged->find(list.passage_ids()[order[i]]);
      if (it != judged->end() && it->second >= positive_threshold) {
        out = 1.0 / static_cast<double>(i + 1);
        break;
      }
    }
    return true;
  });
}

double kendall_tau(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidInput("kendall_tau: length mismatch");
  const std::size_t n = a.size();
  if (n < 2) throw InvalidInput("kendall_tau needs at least 2 items");
  double concordant = 0.0;
  double discordant = 0.0;
  double ties_a = 0.0;
  double ties_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double da = a[i] - a[j];
      const double db = b[i] - b[j];
      if (da == 0.0 && db == 0.0) continue;
      if (da == 0.0) {
        ties_a += 1.0;
      } else if (db == 0.0) {
        ties_b += 1.0;
      } else if ((da > 0.0) == (db > 0.0)) {
        concordant += 1.0;
      } else {
        discordant += 1.0;
      }
    }
  }
  const double denom = std::sqrt((concordant + discordant + ties_a) * (concordant + discordant + ties_b));
  return denom == 0.0 ? 0.0 : (concordant - discordant) / denom;
}

}  // namespace rankforge
