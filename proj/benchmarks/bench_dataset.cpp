#include <benchmark/benchmark.h>

#include "cfpred/dataset.hpp"

using namespace cfpred;

namespace {

void BM_synthetic_timelines(benchmark::State& state) {
  const int users = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto timelines = dataset::generate_synthetic_timelines(users, 40, 7, 5.0);
    benchmark::DoNotOptimize(timelines.data());
  }
}

void BM_build_bundle(benchmark::State& state) {
  auto timelines = dataset::generate_synthetic_timelines(32, 40, 7, 5.0);
  dataset::SplitOptions split;
  split.seed = 11;
  for (auto _ : state) {
    auto bundle = dataset::build_bundle(timelines, 16, dataset::FeatureMode::WITH_PRACTICE, split);
    benchmark::DoNotOptimize(bundle.train.data());
  }
}

} // namespace

BENCHMARK(BM_synthetic_timelines)->Arg(8)->Arg(64);
BENCHMARK(BM_build_bundle);
