#include <benchmark/benchmark.h>

#include <random>

#include "rankforge/metrics.hpp"
#include "rankforge/stats.hpp"

using namespace rankforge;

namespace {

void BM_NdcgRecall1000(benchmark::State& state) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  Run run;
  JudgedPool qrels;
  for (int q = 0; q < 10; ++q) {
    const std::string qid = "q" + std::to_string(q);
    std::vector<std::string> ids;
    std::vector<double> scores;
    for (int i = 0; i < 1000; ++i) {
      ids.push_back("d" + std::to_string(i));
      scores.push_back(normal(rng));
      if (i % 37 == 0) qrels.set(qid, ids.back(), 1 + i % 3);
    }
    run.emplace_back(qid, ids, scores);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(ndcg_at_k(run, qrels, 10));
    benchmark::DoNotOptimize(recall_at_k(run, qrels, 1000));
  }
}
BENCHMARK(BM_NdcgRecall1000)->Unit(benchmark::kMicrosecond);

void BM_SignificanceReport(benchmark::State& state) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> normal;
  std::vector<std::string> methods;
  std::vector<std::string> instances;
  for (int j = 0; j < 6; ++j) methods.push_back("m" + std::to_string(j));
  std::vector<std::vector<double>> values(54, std::vector<double>(6));
  for (int i = 0; i < 54; ++i) {
    instances.push_back("i" + std::to_string(i));
    for (int j = 0; j < 6; ++j) values[i][j] = normal(rng) + 0.2 * j;
  }
  const RankMatrix m(methods, instances, values);
  for (auto _ : state) benchmark::DoNotOptimize(build_report(m));
}
BENCHMARK(BM_SignificanceReport);

}  // namespace
