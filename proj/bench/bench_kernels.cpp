#include <benchmark/benchmark.h>

#include "tabrl/kernels.hpp"

namespace {

tabrl::Matrix random_points(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  tabrl::Rng rng(seed);
  tabrl::Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.uniform(-1.0, 1.0);
  return m;
}

void BM_KnnSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto context = random_points(n, 5, 1);
  const auto queries = random_points(3 * n, 5, 2);
  for (auto _ : state) benchmark::DoNotOptimize(tabrl::kernels::serial::knn_search(context, queries, 5));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(3 * n * n));
}

void BM_KnnOmp(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto context = random_points(n, 5, 1);
  const auto queries = random_points(3 * n, 5, 2);
  for (auto _ : state) benchmark::DoNotOptimize(tabrl::kernels::omp::knn_search(context, queries, 5));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(3 * n * n));
}

void BM_PreviousNearestSerial(benchmark::State& state) {
  const auto points = random_points(static_cast<std::size_t>(state.range(0)), 5, 3);
  for (auto _ : state) benchmark::DoNotOptimize(tabrl::kernels::serial::previous_nearest(points));
}

void BM_PreviousNearestOmp(benchmark::State& state) {
  const auto points = random_points(static_cast<std::size_t>(state.range(0)), 5, 3);
  for (auto _ : state) benchmark::DoNotOptimize(tabrl::kernels::omp::previous_nearest(points));
}

}  // namespace

BENCHMARK(BM_KnnSerial)->Arg(256)->Arg(1024)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KnnOmp)->Arg(256)->Arg(1024)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PreviousNearestSerial)->Arg(512)->Arg(2048)->Arg(8192)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PreviousNearestOmp)->Arg(512)->Arg(2048)->Arg(8192)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
