#include <benchmark/benchmark.h>

#include <random>
#include <sstream>

#include "rankforge/io.hpp"
#include "rankforge/trainer.hpp"

using namespace rankforge;

namespace {

FeatureTable candidates(std::size_t n, std::size_t d) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  FeatureTable table;
  for (std::size_t i = 0; i < n; ++i) {
    FeatureVector x(d);
    for (double& v : x) v = normal(rng);
    table.add("q", "p" + std::to_string(i), std::move(x));
  }
  return table;
}

// Scoring and ordering one query's top-1000 candidates, then writing the run.
void BM_Rerank1000(benchmark::State& state) {
  const auto kind = state.range(0) == 0 ? ScorerKind::kLinear : ScorerKind::kMlp1;
  const ScorerParams params = init_params(kind, 16, kind == ScorerKind::kMlp1 ? 32 : 0, 1);
  const FeatureTable table = candidates(1000, 16);
  for (auto _ : state) {
    std::ostringstream out;
    write_run(out, make_run(score_run(params, table), "bench"));
    benchmark::DoNotOptimize(out.str());
  }
}
BENCHMARK(BM_Rerank1000)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_ParseFeatures1000(benchmark::State& state) {
  std::ostringstream text;
  write_features(text, candidates(1000, 16));
  const std::string s = text.str();
  for (auto _ : state) {
    std::istringstream in(s);
    benchmark::DoNotOptimize(parse_features(in));
  }
}
BENCHMARK(BM_ParseFeatures1000)->Unit(benchmark::kMicrosecond);

}  // namespace
