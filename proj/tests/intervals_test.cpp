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

#include "activetest/intervals.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "activetest/harness.hpp"
#include "activetest/instances.hpp"
#include "test_util.hpp"

namespace activetest {
namespace {

using testing::ExpectError;
using testing::RandomLineSample;
using testing::UniformInt;

WeightedSample Uniform(std::vector<double> pts, std::vector<Label> labels) {
  return WeightedSample::uniform(pts, labels);
}

// Groups by distinct point: (w0, w1) in sorted order.
std::vector<std::pair<double, double>> Groups(const WeightedSample& s) {
  std::map<double, std::pair<double, double>> g;
  for (const auto& e : s.entries()) (*e.label ? g[e.point].second : g[e.point].first) += e.weight;
  std::vector<std::pair<double, double>> out;
  for (const auto& [x, w] : g) out.push_back(w);
  return out;
}

// Every union of <= d intervals is, on the sample, a labeling of the
// distinct points with <= d runs of ones.
double BruteDistance(const WeightedSample& s, std::size_t d) {
  const auto g = Groups(s);
  const std::size_t n = g.size();
  double best = 1e300;
  for (std::uint32_t h = 0; h < (1u << n); ++h) {
    std::size_t runs = 0;
    double cost = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const bool on = (h >> j) & 1u;
      cost += on ? g[j].first : g[j].second;
      if (on && (j == 0 || !((h >> (j - 1)) & 1u))) ++runs;
    }
    if (runs <= d) best = std::min(best, cost);
  }
  return best;
}

double Disagreement(const WeightedSample& s, const IntervalUnion& g) {
  double w = 0.0;
  for (const auto& e : s.entries()) w += g.label(e.point) != *e.label ? e.weight : 0.0;
  return w;
}

TEST(IntervalUnion, Representation) {
  IntervalUnion g({{0.1, 0.2}, {0.4, 0.5}});
  EXPECT_TRUE(g.contains(0.1));
  EXPECT_TRUE(g.contains(0.5));
  EXPECT_FALSE(g.contains(0.3));
  EXPECT_NEAR(g.measure01(), 0.2, 1e-15);
  ExpectError([] { IntervalUnion({{0.4, 0.5}, {0.1, 0.2}}); }, ErrorCode::kInvalidParameter);
  ExpectError([] { IntervalUnion({{0.1, 0.2}, {0.2, 0.3}}); }, ErrorCode::kInvalidParameter);
  ExpectError([] { IntervalUnion({{0.3, 0.2}}); }, ErrorCode::kInvalidParameter);
  const auto merged = IntervalUnion::normalize({{0.2, 0.3}, {0.1, 0.2}, {0.5, 0.6}});
  EXPECT_EQ(merged.size(), 2u);
}

TEST(ExactDistance, ThreePoints) {
  const auto fit = exact_distance_to_intervals(Uniform({0.1, 0.5, 0.9}, {1, 0, 1}), 1);
  EXPECT_NEAR(fit.alpha, 1.0 / 3.0, 1e-15);
  EXPECT_LE(fit.witness.size(), 1u);
}

TEST(ExactDistance, AllZero) {
  for (long long d : {0, 1, 5}) {
    const auto fit = exact_distance_to_intervals(Uniform({0.1, 0.5, 0.9}, {0, 0, 0}), d);
    EXPECT_EQ(fit.alpha, 0.0);
    EXPECT_TRUE(fit.witness.empty());
  }
}

TEST(ExactDistance, FivePointsTwoIntervals) {
  const auto fit =
      exact_distance_to_intervals(Uniform({1, 2, 3, 4, 5}, {1, 0, 1, 0, 1}), 2);
  EXPECT_NEAR(fit.alpha, 1.0 / 5.0, 1e-15);
}

TEST(ExactDistance, Errors) {
  ExpectError([] { exact_distance_to_intervals(Uniform({0.1}, {1}), -1); },
              ErrorCode::kInvalidClassParameter);
  ExpectError([] { exact_distance_to_intervals(WeightedSample(), 1); },
              ErrorCode::kInvalidParameter);
}

// Up to 12 points, d <= 3: DP equals exhaustive search, and the witness
// realizes the distance with at most d intervals.
TEST(ExactDistance, MatchesExhaustive) {
  Rng rng(101);
  for (int trial = 0; trial < 400; ++trial) {
    const auto s = RandomLineSample(rng, UniformInt(rng, 1, 12), 14);
    for (std::size_t d = 0; d <= 3; ++d) {
      const auto fit = exact_distance_to_intervals(s, static_cast<long long>(d));
      EXPECT_NEAR(fit.alpha, BruteDistance(s, d), 1e-12);
      EXPECT_LE(fit.witness.size(), d);
      EXPECT_NEAR(Disagreement(s, fit.witness), fit.alpha, 1e-12);
    }
  }
}

TEST(ExactDistance, MonotoneAndZeroAtRunCount) {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    // Distinct points so "runs of ones" is well defined.
    const std::size_t n = UniformInt(rng, 1, 30);
    std::vector<double> pts(n);
    std::vector<Label> labels(n);
    std::bernoulli_distribution coin(0.5);
    std::size_t runs = 0;
    for (std::size_t i = 0; i < n; ++i) {
      pts[i] = static_cast<double>(i);
      labels[i] = coin(rng) ? 1 : 0;
      if (labels[i] && (i == 0 || !labels[i - 1])) ++runs;
    }
    const auto s = Uniform(pts, labels);
    double prev = 2.0;
    for (std::size_t d = 0; d <= runs + 1; ++d) {
      const double a = exact_distance_to_intervals(s, static_cast<long long>(d)).alpha;
      EXPECT_LE(a, prev + 1e-15);
      prev = a;
      if (d >= runs) EXPECT_EQ(a, 0.0);
    }
  }
}

TEST(CostsByBudget, MatchesSingleCalls) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = RandomLineSample(rng, UniformInt(rng, 1, 40), 20);
    const auto c = interval_costs_by_budget(s, 6);
    ASSERT_EQ(c.size(), 7u);
    for (std::size_t k = 0; k <= 6; ++k) {
      EXPECT_NEAR(c[k], exact_distance_to_intervals(s, static_cast<long long>(k)).alpha, 1e-12);
    }
  }
  EXPECT_EQ(interval_costs_by_budget(WeightedSample(), 3), std::vector<double>(4, 0.0));
}

IntervalUnion FromLengths(const std::vector<double>& lengths) {
  std::vector<Interval> ivs;
  double x = 0.0;
  const double gap = 0.001;
  for (double len : lengths) {
    ivs.push_back({x, x + len});
    x += len + gap;
  }
  return IntervalUnion(std::move(ivs));
}

TEST(Shrink, RegimeCheck) {
  // d = 3 with eps = 0.5 has d <= 2/eps.
  ExpectError([] { shrink_interval_union(FromLengths({0.01, 0.02, 0.3, 0.3}), 3, 0.5); },
              ErrorCode::kRegimeViolation);
}

TEST(Shrink, RemovesShortest) {
  // k = 6 > d = 5, eps = 0.5: ceil(1.5) = 2 shortest go.
  const auto g = FromLengths({0.05, 0.01, 0.1, 0.02, 0.1, 0.1});
  const auto out = shrink_interval_union(g, 5, 0.5);
  ASSERT_EQ(out.size(), 4u);
  for (const auto& iv : out.intervals()) EXPECT_GE(iv.length(), 0.05 - 1e-12);
}

TEST(Shrink, NoOpWhenWithinBudget) {
  const auto g = FromLengths({0.01, 0.02, 0.3, 0.3});
  const auto out = shrink_interval_union(g, 5, 0.5);
  EXPECT_EQ(out.intervals().size(), g.intervals().size());
}

TEST(Shrink, EqualLengths) {
  // k = 10 intervals of length 1/10, eps = 0.4, d = 9 (k <= (1 + eps/2) d):
  // ceil(2) = 2 removed, measure 0.2.
  std::vector<Interval> ivs;
  for (int i = 0; i < 10; ++i) ivs.push_back({i / 10.0, i / 10.0 + 0.0999});
  const IntervalUnion g(ivs);
  const auto out = shrink_interval_union(g, 9, 0.4);
  EXPECT_EQ(out.size(), 8u);
  EXPECT_NEAR(g.measure01() - out.measure01(), 2 * 0.0999, 1e-12);
}

TEST(Shrink, RemovedMeasureBound) {
  Rng rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const double eps = 0.05 + 0.9 * u(rng);
    const auto d = static_cast<std::size_t>(std::floor(2.0 / eps)) + UniformInt(rng, 1, 30);
    const auto k = UniformInt(rng, 0, static_cast<std::size_t>(
                                          std::floor((1.0 + eps / 2.0) * static_cast<double>(d))));
    // k random disjoint intervals inside [0,1]: 2k sorted cut points.
    std::vector<double> cuts(2 * k);
    for (auto& c : cuts) c = u(rng);
    std::sort(cuts.begin(), cuts.end());
    std::vector<Interval> ivs;
    for (std::size_t i = 0; i < k; ++i) ivs.push_back({cuts[2 * i], cuts[2 * i + 1]});
    const auto g = IntervalUnion::normalize(ivs);
    const auto out = shrink_interval_union(g, d, eps);
    EXPECT_LE(out.size(), d);
    EXPECT_LE(g.measure01() - out.measure01(), eps / 2.0 + 1.0 / static_cast<double>(d) + 1e-12);
  }
}

TEST(Blocks, HalfOpenCuts) {
  EXPECT_EQ(interval_block_of(0.0, 4), 0u);
  EXPECT_EQ(interval_block_of(0.25, 4), 0u);
  EXPECT_EQ(interval_block_of(0.2500001, 4), 1u);
  EXPECT_EQ(interval_block_of(0.5, 4), 1u);
  EXPECT_EQ(interval_block_of(1.0, 4), 3u);
  ExpectError([] { interval_block_spec(0); }, ErrorCode::kInvalidClassParameter);
}

TEST(RankMap, TiesByPosition) {
  const std::vector<double> pts{0.5, 0.1, 0.5, 0.9};
  const auto r = rank_map(pts);
  EXPECT_DOUBLE_EQ(r[1], 0.125);
  EXPECT_DOUBLE_EQ(r[0], 0.375);
  EXPECT_DOUBLE_EQ(r[2], 0.625);
  EXPECT_DOUBLE_EQ(r[3], 0.875);
}

TEST(Plan, LabelBudgetFormula) {
  // ceil(2e-4 ln(10) / 1e-6) = 461, rounded up to a multiple of 45.
  EXPECT_EQ(interval_label_budget(0.1), 495u);
  ExpectError([] { interval_label_budget(0.5); }, ErrorCode::kInvalidParameter);
}

TEST(Plan, CompositionBranchParameters) {
  const auto plan = plan_interval_da(0.1, 800);
  EXPECT_FALSE(plan.agnostic);
  EXPECT_EQ(plan.m, 10u);
  EXPECT_DOUBLE_EQ(plan.lambda, 80.0);
  EXPECT_DOUBLE_EQ(plan.inner_eps, 0.05);
  EXPECT_NEAR(1.0 + plan.mu, (1.0 + 0.1 / 4.0) / (1.0 + 0.1 / 8.0), 1e-15);
  const auto comp =
      plan_composition_da(plan.m, plan.lambda_prime, plan.inner_eps, plan.mu, plan.composition);
  // t = 4 (1 + eps/8) lambda / eps' = 4 * 1.0125 * 80 / 0.05
  EXPECT_EQ(comp.truncation, 6480u);
  EXPECT_TRUE(plan_interval_da(0.1, 80).agnostic);
}

double SuccessRate(const std::function<bool(Rng&)>& trial, int n, std::uint64_t seed) {
  int ok = 0;
  for (int i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    ok += trial(rng) ? 1 : 0;
  }
  return ok;
}

TEST(IntervalDaUniform, RealizableTarget) {
  const double eps = 0.1;
  const std::size_t d = 6;
  Rng gen(1);
  const CellTarget t = make_cell_target(6000, {{2, 0}, {2, 0}, {2, 0}}, gen);
  const auto plan = plan_interval_da(eps, d);
  const int n = 30;
  const double ok = SuccessRate(
      [&](Rng& rng) {
        LinePool pool(Distribution::uniform01().sample_n(plan.pool_required, rng),
                      LineOracle(t.function()));
        const auto r = interval_da_uniform(pool, eps, d, rng);
        EXPECT_EQ(r.queries_used, pool.queries_used());
        return r.alpha_hat <= eps;
      },
      n, 2);
  EXPECT_GE(ok, static_cast<double>(required_successes(n, 2.0 / 3.0)));
}

TEST(IntervalDaUniform, NoisyTargetAgainstGridTruth) {
  const double eps = 0.1;
  const std::size_t d = 4;
  Rng gen(3);
  const CellTarget t = make_cell_target(10000, {{4, 0.2}}, gen);
  const double truth = exact_distance_to_intervals(t.grid(), d).alpha;
  const auto plan = plan_interval_da(eps, d);
  const int n = 30;
  const double ok = SuccessRate(
      [&](Rng& rng) {
        LinePool pool(Distribution::uniform01().sample_n(plan.pool_required, rng),
                      LineOracle(t.function()));
        return std::abs(interval_da_uniform(pool, eps, d, rng).alpha_hat - truth) <= eps;
      },
      n, 4);
  EXPECT_GE(ok, static_cast<double>(required_successes(n, 2.0 / 3.0)));
}

TEST(IntervalDaUniform, CompositionBranchWitnessWithinBudget) {
  const double eps = 0.2;
  const std::size_t d = 80;  // m = 2
  Rng gen(9);
  const CellTarget t = make_cell_target(20000, {{30, 0.05}, {30, 0.05}}, gen);
  const auto plan = plan_interval_da(eps, d);
  ASSERT_FALSE(plan.agnostic);
  Rng rng(10);
  LinePool pool(Distribution::uniform01().sample_n(plan.pool_required, rng),
                LineOracle(t.function()));
  const auto r = interval_da_uniform(pool, eps, d, rng);
  EXPECT_EQ(r.queries_used, plan.labels);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_LE(r.witness->size(), d);
  EXPECT_GE(r.alpha_hat, 0.0);
  EXPECT_LE(r.alpha_hat, 1.0);
}

TEST(IntervalDaUniform, InsufficientPool) {
  Rng rng(1);
  LinePool pool({0.5}, LineOracle([](double) -> Label { return 0; }));
  ExpectError([&] { interval_da_uniform(pool, 0.1, 5, rng); }, ErrorCode::kInsufficientPool);
  ExpectError([&] { interval_da_uniform(pool, 0.6, 5, rng); }, ErrorCode::kInvalidParameter);
}

TEST(IntervalDa, TwoPointMasses) {
  const auto dist = Distribution::finite({0.2, 0.8}, {0.5, 0.5});
  auto target = [](double x) -> Label { return x < 0.5 ? 1 : 0; };
  const int n = 20;
  const double ok = SuccessRate(
      [&](Rng& rng) { return interval_da(dist, target, 0.2, 1, rng).alpha_hat <= 0.2; }, n, 6);
  EXPECT_GE(ok, static_cast<double>(required_successes(n, 2.0 / 3.0)));
}

TEST(IntervalDa, LabelBudgetIndependentOfD) {
  Rng gen(2);
  const CellTarget t = make_cell_target(10000, {{20, 0.1}}, gen);
  std::set<std::uint64_t> counts;
  for (std::size_t d : {64u, 256u, 1024u}) {
    Rng rng(77);
    const auto r = interval_da(Distribution::uniform01(), t.function(), 0.2, d, rng);
    counts.insert(r.queries_used);
    const double bound = interval_unlabeled_constant() * static_cast<double>(d) / 0.04 *
                         std::log(1.0 / 0.2);
    EXPECT_LE(static_cast<double>(r.unlabeled_used), bound);
  }
  EXPECT_EQ(counts.size(), 1u);
}

TEST(IntervalDa, ReproducibleWithSeed) {
  Rng gen(2);
  const CellTarget t = make_cell_target(1000, {{5, 0.1}}, gen);
  Rng a(5), b(5);
  const auto ra = interval_da(Distribution::uniform01(), t.function(), 0.2, 5, a);
  const auto rb = interval_da(Distribution::uniform01(), t.function(), 0.2, 5, b);
  EXPECT_EQ(ra.alpha_hat, rb.alpha_hat);
  EXPECT_EQ(ra.queries_used, rb.queries_used);
}

TEST(GridSample, Midpoints) {
  const auto s = grid_sample(4, [](double x) -> Label { return x > 0.5 ? 1 : 0; });
  ASSERT_EQ(s.size(), 4u);
  EXPECT_DOUBLE_EQ(s[0].point, 0.125);
  EXPECT_DOUBLE_EQ(s[3].point, 0.875);
  EXPECT_EQ(*s[3].label, 1);
  EXPECT_TRUE(s.is_normalized());
}

}  // namespace
}  // namespace activetest
