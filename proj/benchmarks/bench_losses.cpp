#include <benchmark/benchmark.h>

#include <random>

#include "rankforge/losses.hpp"

using namespace rankforge;

namespace {

std::vector<double> random_scores(std::size_t n) {
  std::mt19937_64 rng(n);
  std::normal_distribution<double> normal(0.0, 3.0);
  std::vector<double> s(n);
  for (double& x : s) x = normal(rng);
  return s;
}

void BM_InfoNce(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto s = random_scores(n);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("d" + std::to_string(i));
  std::vector<int> labels(n, 0);
  labels[0] = 1;
  const ScoredList list("q", ids, s, labels);
  for (auto _ : state) benchmark::DoNotOptimize(info_nce(list));
}
BENCHMARK(BM_InfoNce)->Arg(8)->Arg(64);

void BM_DistillRankNet(benchmark::State& state) {
  const auto s = random_scores(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(distill_ranknet(s));
}
BENCHMARK(BM_DistillRankNet)->Arg(8)->Arg(50);

void BM_AdrMse(benchmark::State& state) {
  const auto s = random_scores(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(adr_mse(s));
}
BENCHMARK(BM_AdrMse)->Arg(8)->Arg(50);

void BM_MarginMse(benchmark::State& state) {
  const DistillTriplet t{"q", "a", "b", 7.25, 1.5};
  for (auto _ : state) benchmark::DoNotOptimize(margin_mse(t, 1.0, 0.5));
}
BENCHMARK(BM_MarginMse);

}  // namespace
