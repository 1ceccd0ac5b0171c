#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "latent_split/linalg.hpp"
#include "latent_split/metrics.hpp"
#include "latent_split/random.hpp"
#include "latent_split/tsne.hpp"

namespace {

using namespace latent_split;

Matrix gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.gaussian();
  return m;
}

void BM_Svd(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = static_cast<std::size_t>(state.range(1));
  const Matrix x = gaussian(n, d, 1);
  for (auto _ : state) benchmark::DoNotOptimize(svd(x));
}
BENCHMARK(BM_Svd)->Args({200, 64})->Args({1800, 64})->Args({500, 256})->Unit(benchmark::kMillisecond);

void BM_Silhouette(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix x = gaussian(n, 16, 2);
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = i % 9;
  for (auto _ : state) benchmark::DoNotOptimize(silhouette(x, std::span<const std::size_t>(labels)));
  state.SetComplexityN(static_cast<benchmark::IterationCount>(n));
}
BENCHMARK(BM_Silhouette)->RangeMultiplier(2)->Range(256, 2048)->Complexity(benchmark::oNSquared)->Unit(benchmark::kMillisecond);

void BM_TsneGradient(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix p = tsne::joint_probabilities(gaussian(n, 8, 3), 30.0).p;
  const Matrix y = gaussian(n, 2, 4);
  for (auto _ : state) benchmark::DoNotOptimize(tsne::kl_gradient(p, y));
}
BENCHMARK(BM_TsneGradient)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
