#include <benchmark/benchmark.h>

#include <random>

#include "aamsupcon/eval.hpp"

using namespace aamsupcon;

namespace {

ScoredTrials random_trials(std::size_t n) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  ScoredTrials s;
  for (std::size_t k = 0; k < n; ++k) {
    const bool target = k % 2 == 0;
    s.is_target.push_back(target);
    s.scores.push_back(g(rng) + (target ? 1.0 : 0.0));
  }
  return s;
}

void BM_Eer(benchmark::State& state) {
  const ScoredTrials s = random_trials(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(eer(s).value);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Eer)->RangeMultiplier(10)->Range(1000, 1000000)->Complexity(benchmark::oNLogN);

void BM_MinDcf(benchmark::State& state) {
  const ScoredTrials s = random_trials(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(min_dcf(s).value);
}
BENCHMARK(BM_MinDcf)->RangeMultiplier(10)->Range(1000, 1000000);

}  // namespace

BENCHMARK_MAIN();
