#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "oracles.hpp"
#include "rankforge/error.hpp"
#include "rankforge/metrics.hpp"

using namespace rankforge;

namespace {

// A list whose evaluation order is exactly `ids` (strictly decreasing scores).
ScoredList ranked(const std::string& qid, const std::vector<std::string>& ids) {
  std::vector<double> scores(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) scores[i] = static_cast<double>(ids.size() - i);
  return ScoredList(qid, ids, scores);
}

}  // namespace

TEST(Ndcg, IdealOrderingIsOne) {
  JudgedPool qrels;
  qrels.set("q", "a", 3);
  qrels.set("q", "b", 2);
  qrels.set("q", "c", 0);
  qrels.set("q", "d", 1);
  const auto r = ndcg_at_k({ranked("q", {"a", "b", "d", "c"})}, qrels, 10);
  EXPECT_DOUBLE_EQ(r.mean, 1.0);
  EXPECT_EQ(r.num_queries, 1u);
}

TEST(Ndcg, SingleRelevantAtRankTwo) {
  JudgedPool qrels;
  qrels.set("q", "rel", 1);
  const auto r = ndcg_at_k({ranked("q", {"x", "rel", "y"})}, qrels, 10);
  EXPECT_NEAR(r.mean, 1.0 / std::log2(3.0), 1e-15);
  EXPECT_NEAR(r.mean, 0.6309, 1e-4);
}

TEST(Ndcg, IdealUsesAllJudgedGrades) {
  // A relevant document missing from the run still counts in the ideal DCG.
  JudgedPool qrels;
  qrels.set("q", "a", 1);
  qrels.set("q", "missing", 3);
  const auto r = ndcg_at_k({ranked("q", {"a"})}, qrels, 10);
  const double ideal = 7.0 + 1.0 / std::log2(3.0);
  EXPECT_NEAR(r.mean, 1.0 / ideal, 1e-15);
}

TEST(Ndcg, ExcludesQueriesWithoutRelevantJudgments) {
  JudgedPool qrels;
  qrels.set("q1", "a", 1);
  qrels.set("q2", "a", 0);
  const rankforge::Run run = {ranked("q1", {"a"}), ranked("q2", {"a"}), ranked("q3", {"a"})};
  const auto r = ndcg_at_k(run, qrels, 10);
  EXPECT_EQ(r.num_queries, 1u);
  EXPECT_EQ(r.num_excluded, 2u);
  EXPECT_DOUBLE_EQ(r.mean, 1.0);
}

TEST(Ndcg, EmptyRunReportsZeroQueries) {
  JudgedPool qrels;
  qrels.set("q", "a", 1);
  const auto r = ndcg_at_k({}, qrels, 10);
  EXPECT_EQ(r.num_queries, 0u);
  EXPECT_EQ(r.mean, 0.0);
}

TEST(Ndcg, LinearGainOption) {
  JudgedPool qrels;
  qrels.set("q", "a", 3);
  qrels.set("q", "b", 1);
  const auto r = ndcg_at_k({ranked("q", {"b", "a"})}, qrels, 10, GainKind::kLinear);
  const double l3 = 1.0 / std::log2(3.0);
  EXPECT_NEAR(r.mean, (1.0 + 3.0 * l3) / (3.0 + 1.0 * l3), 1e-15);
}

TEST(Metrics, RejectZeroCutoff) {
  JudgedPool qrels;
  qrels.set("q", "a", 1);
  const rankforge::Run run = {ranked("q", {"a"})};
  EXPECT_THROW(ndcg_at_k(run, qrels, 0), InvalidInput);
  EXPECT_THROW(recall_at_k(run, qrels, 0), InvalidInput);
  EXPECT_THROW(mrr_at_k(run, qrels, 0), InvalidInput);
}

TEST(Oracle, NdcgAndRecallMatchBruteForce) {
  std::mt19937_64 rng(2718);
  std::uniform_int_distribution<int> grade(0, 3);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + trial % 6;
    const std::size_t k = 1 + (trial / 6) % 7;
    std::vector<std::string> ids(n);
    std::vector<double> scores(n);
    JudgedPool qrels;
    std::vector<int> judged_grades;
    for (std::size_t i = 0; i < n; ++i) {
      ids[i] = "p" + std::to_string(i);
      scores[i] = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
      const int g = grade(rng);
      qrels.set("q", ids[i], g);
      judged_grades.push_back(g);
    }
    const ScoredList list("q", ids, scores);
    const auto order = evaluation_order(list);
    std::vector<int> grades_in_order;
    std::vector<std::string> ids_in_order;
    for (std::size_t i : order) {
      grades_in_order.push_back(qrels.grade("q", ids[i]));
      ids_in_order.push_back(ids[i]);
    }
    const double expected_ndcg = oracle::ndcg_bruteforce(grades_in_order, judged_grades, k);
    const auto ndcg = ndcg_at_k({list}, qrels, k);
    if (expected_ndcg < 0.0) {
      EXPECT_EQ(ndcg.num_queries, 0u);
    } else {
      ASSERT_EQ(ndcg.num_queries, 1u);
      EXPECT_NEAR(ndcg.mean, expected_ndcg, 1e-12) << "trial " << trial;
    }

    for (int threshold : {1, 2}) {
      std::set<std::string> relevant;
      for (std::size_t i = 0; i < n; ++i) {
        if (qrels.grade("q", ids[i]) >= threshold) relevant.insert(ids[i]);
      }
      const double expected_recall = oracle::recall_bruteforce(ids_in_order, relevant, k);
      const auto recall = recall_at_k({list}, qrels, k, threshold);
      if (expected_recall < 0.0) {
        EXPECT_EQ(recall.num_queries, 0u);
        EXPECT_EQ(recall.num_excluded, 1u);
      } else {
        EXPECT_NEAR(recall.mean, expected_recall, 1e-12) << "trial " << trial;
      }
    }
  }
}

TEST(Recall, Examples) {
  JudgedPool qrels;
  for (const char* id : {"a", "b", "c", "d"}) qrels.set("q", id, 1);
  qrels.set("q", "x", 0);
  EXPECT_DOUBLE_EQ(recall_at_k({ranked("q", {"a", "b", "c", "d", "x"})}, qrels, 4).mean, 1.0);
  EXPECT_DOUBLE_EQ(recall_at_k({ranked("q", {"a", "x", "b", "c", "d"})}, qrels, 3).mean, 0.5);
}

TEST(Recall, MonotoneInK) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    JudgedPool qrels;
    std::vector<std::string> ids;
    for (int i = 0; i < 30; ++i) {
      ids.push_back("d" + std::to_string(i));
      qrels.set("q", ids.back(), std::uniform_int_distribution<int>(0, 2)(rng));
    }
    std::shuffle(ids.begin(), ids.end(), rng);
    const rankforge::Run run = {ranked("q", ids)};
    double previous = 0.0;
    for (std::size_t k = 1; k <= 35; ++k) {
      const double r = recall_at_k(run, qrels, k).mean;
      EXPECT_GE(r, previous);
      EXPECT_LE(r, 1.0);
      previous = r;
    }
  }
}

TEST(Mrr, Examples) {
  JudgedPool qrels;
  qrels.set("q", "rel", 1);
  EXPECT_DOUBLE_EQ(mrr_at_k({ranked("q", {"rel", "a", "b"})}, qrels, 10).mean, 1.0);
  EXPECT_DOUBLE_EQ(mrr_at_k({ranked("q", {"a", "b", "c", "rel"})}, qrels, 10).mean, 0.25);
  const auto none = mrr_at_k({ranked("q", {"a", "b", "c", "rel"})}, qrels, 3);
  EXPECT_DOUBLE_EQ(none.mean, 0.0);
  EXPECT_EQ(none.num_queries, 1u);
}

TEST(Properties, OrderingNotScoresMatters) {
  JudgedPool qrels;
  qrels.set("q", "a", 2);
  qrels.set("q", "b", 0);
  qrels.set("q", "c", 1);
  const ScoredList low("q", {"a", "b", "c"}, {0.3, 0.1, 0.2});
  const ScoredList high("q", {"a", "b", "c"}, {300.0, -5.0, 7.5});
  EXPECT_DOUBLE_EQ(ndcg_at_k({low}, qrels, 10).mean, ndcg_at_k({high}, qrels, 10).mean);
}

TEST(Properties, EqualGradeSwapAndPromotions) {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 200; ++trial) {
    JudgedPool qrels;
    std::vector<std::string> ids;
    for (int i = 0; i < 8; ++i) {
      ids.push_back("d" + std::to_string(i));
      qrels.set("q", ids.back(), std::uniform_int_distribution<int>(0, 3)(rng));
    }
    std::shuffle(ids.begin(), ids.end(), rng);
    const std::size_t k = 5;
    const double base = ndcg_at_k({ranked("q", ids)}, qrels, k).mean;
    const std::size_t i = std::uniform_int_distribution<std::size_t>(0, 6)(rng);
    const std::size_t j = std::uniform_int_distribution<std::size_t>(i + 1, 7)(rng);
    auto swapped = ids;
    std::swap(swapped[i], swapped[j]);
    const double after = ndcg_at_k({ranked("q", swapped)}, qrels, k).mean;
    const int gi = qrels.grade("q", ids[i]);
    const int gj = qrels.grade("q", ids[j]);
    if (gi == gj) {
      EXPECT_NEAR(after, base, 1e-12);
    } else if (gj > gi && i < k) {
      EXPECT_GE(after, base - 1e-12);  // promoted the higher grade into position i
    }
    EXPECT_GE(after, 0.0);
    EXPECT_LE(after, 1.0 + 1e-12);
  }
}

TEST(EvaluationOrder, TiesBreakByPassageId) {
  const ScoredList list("q", {"c", "a", "b", "z"}, {1.0, 1.0, 2.0, 1.0});
  const auto order = evaluation_order(list);
  EXPECT_EQ(order, (std::vector<std::size_t>{2, 1, 0, 3}));
  const ScoredList permuted("q", {"z", "b", "a", "c"}, {1.0, 2.0, 1.0, 1.0});
  JudgedPool qrels;
  qrels.set("q", "a", 2);
  qrels.set("q", "z", 1);
  EXPECT_EQ(ndcg_at_k({list}, qrels, 2).mean, ndcg_at_k({permuted}, qrels, 2).mean);
}

TEST(KendallTau, Basics) {
  const std::vector<double> a = {1.0, 2.0, 3.0, 4.0};
  const std::vector<double> rev = {4.0, 3.0, 2.0, 1.0};
  EXPECT_DOUBLE_EQ(kendall_tau(a, a), 1.0);
  EXPECT_DOUBLE_EQ(kendall_tau(a, rev), -1.0);
  const std::vector<double> one_swap = {2.0, 1.0, 3.0, 4.0};
  EXPECT_NEAR(kendall_tau(a, one_swap), 4.0 / 6.0, 1e-15);
  const std::vector<double> shorter = {1.0};
  EXPECT_THROW(kendall_tau(a, shorter), InvalidInput);
}

TEST(KendallTau, TauBWithTies) {
  // scipy.stats.kendalltau([1,2,2,3], [1,2,3,3]) = 0.8
  const std::vector<double> x = {1.0, 2.0, 2.0, 3.0};
  const std::vector<double> y = {1.0, 2.0, 3.0, 3.0};
  EXPECT_NEAR(kendall_tau(x, y), 0.8, 1e-12);
}
