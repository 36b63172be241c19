// Copyright 2026 The activetest Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Hot loops: the interval distance DP, the truncated-composition knapsack,
// and k-NN neighbour ranking with and without the cache.

#include <benchmark/benchmark.h>

#include <random>

#include "activetest/composition.hpp"
#include "activetest/instances.hpp"
#include "activetest/intervals.hpp"
#include "activetest/knn.hpp"

namespace activetest {
namespace {

WeightedSample NoisySample(std::size_t n) {
  Rng rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  WeightedSample s;
  for (std::size_t i = 0; i < n; ++i) s.add(u(rng), 1.0 / static_cast<double>(n), coin(rng));
  return s;
}

void BM_IntervalDp(benchmark::State& state) {
  const auto s = NoisySample(static_cast<std::size_t>(state.range(0)));
  const long long d = state.range(1);
  for (auto _ : state) benchmark::DoNotOptimize(exact_distance_to_intervals(s, d).alpha);
}
BENCHMARK(BM_IntervalDp)->Args({1000, 4})->Args({10000, 4})->Args({10000, 64});

void BM_Knapsack(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const std::size_t t = 16;
  Rng rng(2);
  std::uniform_real_distribution<double> u(0.0, 0.01);
  std::vector<std::vector<double>> costs(m);
  for (auto& c : costs) {
    double v = u(rng);
    for (std::size_t k = 0; k <= t; ++k) {
      c.push_back(v);
      v = std::max(0.0, v - u(rng) / 4.0);
    }
  }
  for (auto _ : state) benchmark::DoNotOptimize(knapsack_allocate(costs, 2 * m, t).distance);
}
BENCHMARK(BM_Knapsack)->Arg(40)->Arg(400);

void BM_KnnNearest(benchmark::State& state) {
  Rng rng(3);
  KnnInstance inst = make_line_knn(2000, 500, 8, 0.1, rng);
  if (state.range(0)) inst.precompute_rankings();
  std::vector<std::uint32_t> scratch;
  PointId x = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(inst.nearest(x, 25, scratch).data());
    x = (x + 1) % 2000;
  }
}
BENCHMARK(BM_KnnNearest)->Arg(0)->Arg(1);

void BM_SoftLossTable(benchmark::State& state) {
  Rng rng(4);
  const KnnInstance inst = make_line_knn(800, 200, 8, 0.1, rng);
  const auto u = IndexDistribution::uniform(800);
  for (auto _ : state) benchmark::DoNotOptimize(exact_soft_loss_table(inst, u, 2).data());
}
BENCHMARK(BM_SoftLossTable);

}  // namespace
}  // namespace activetest

BENCHMARK_MAIN();
