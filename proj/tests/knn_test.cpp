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

#include "activetest/knn.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "activetest/harness.hpp"
#include "activetest/instances.hpp"
#include "test_util.hpp"

namespace activetest {
namespace {

using testing::ExpectError;
using testing::UniformInt;

// Small 1-d instance with integer coordinates so distances tie often.
KnnInstance TinyInstance(Rng& rng, std::size_t max_ground = 8) {
  const std::size_t n = UniformInt(rng, 1, max_ground);
  std::vector<double> coords(n);
  std::vector<Label> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    coords[i] = static_cast<double>(UniformInt(rng, 0, 4));
    labels[i] = UniformInt(rng, 0, 1) ? 1 : 0;
  }
  std::vector<PointId> pool(UniformInt(rng, 1, n + 2));
  for (auto& x : pool) x = static_cast<PointId>(UniformInt(rng, 0, n - 1));
  return KnnInstance(MetricSpace::euclidean1d(coords), pool, labels);
}

// Pool positions sorted by (distance, position), written out independently.
std::vector<std::size_t> BruteOrder(const KnnInstance& inst, PointId x) {
  std::vector<std::size_t> order(inst.pool_size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return inst.space().distance(x, inst.pool()[a]) < inst.space().distance(x, inst.pool()[b]);
  });
  return order;
}

double BruteErr1(const KnnInstance& inst, PointId x, std::size_t k) {
  const auto order = BruteOrder(inst, x);
  double wrong = 0;
  for (std::size_t j = 0; j < k; ++j) wrong += inst.label(inst.pool()[order[j]]) != inst.label(x);
  return wrong / static_cast<double>(k);
}

double BruteSoftLoss(const KnnInstance& inst, std::size_t k, std::size_t p) {
  double s = 0;
  for (PointId x = 0; x < inst.ground_size(); ++x) s += std::pow(BruteErr1(inst, x, k), p);
  return s / static_cast<double>(inst.ground_size());
}

double BruteHardError(const KnnInstance& inst, std::size_t k) {
  double s = 0;
  for (PointId x = 0; x < inst.ground_size(); ++x) {
    const double err = BruteErr1(inst, x, k);
    const double ones = inst.label(x) ? 1.0 - err : err;
    s += (ones > 0.5 ? 1 : 0) != inst.label(x);
  }
  return s / static_cast<double>(inst.ground_size());
}

TEST(Predictors, Examples) {
  // pool labels along the line: 0 0 1 1 at coordinates 0 1 2 3
  KnnInstance inst(MetricSpace::euclidean1d({0, 1, 2, 3}), {0, 1, 2, 3}, {0, 0, 1, 1});
  EXPECT_DOUBLE_EQ(knn_predict_soft(inst, 0, 1), 0.0);
  EXPECT_DOUBLE_EQ(knn_predict_soft(inst, 0, 3), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(knn_predict_soft(inst, 0, 4), 0.5);
  EXPECT_EQ(knn_predict_hard(inst, 3, 3), 1);
  // exactly one half is not a majority
  EXPECT_EQ(knn_predict_hard(inst, 1, 4), 0);
  EXPECT_EQ(knn_predict_hard(inst, 2, 4), 0);
  ExpectError([&] { knn_predict_soft(inst, 0, 5); }, ErrorCode::kInvalidK);
  ExpectError([&] { knn_predict_soft(inst, 0, 0); }, ErrorCode::kInvalidK);
}

TEST(Neighbours, TieBreakIsPrefixConsistent) {
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    KnnInstance inst = TinyInstance(rng);
    KnnInstance cached = inst;
    cached.precompute_rankings();
    ASSERT_TRUE(cached.has_ranking_cache());
    std::vector<std::uint32_t> s1, s2;
    for (PointId x = 0; x < inst.ground_size(); ++x) {
      const auto brute = BruteOrder(inst, x);
      for (std::size_t k = 1; k <= inst.pool_size(); ++k) {
        const auto a = inst.nearest(x, k, s1);
        const auto b = cached.nearest(x, k, s2);
        ASSERT_EQ(a.size(), k);
        for (std::size_t j = 0; j < k; ++j) {
          EXPECT_EQ(a[j], brute[j]);
          EXPECT_EQ(b[j], brute[j]);
        }
      }
    }
  }
}

TEST(Metric, Validation) {
  ExpectError([] { MetricSpace::explicit_matrix({{0, 1}, {2, 0}}); }, ErrorCode::kFormat);
  ExpectError([] { MetricSpace::explicit_matrix({{0, 1}, {1, 1}}); }, ErrorCode::kFormat);
  ExpectError([] { MetricSpace::explicit_matrix({{0, 1}, {1}}); }, ErrorCode::kFormat);
  ExpectError([] { KnnInstance(MetricSpace::euclidean1d({0, 1}), {}, {0, 1}); },
              ErrorCode::kInvalidParameter);
  ExpectError([] { KnnInstance(MetricSpace::euclidean1d({0, 1}), {2}, {0, 1}); },
              ErrorCode::kBadIndex);
  ExpectError([] { KnnInstance(MetricSpace::euclidean1d({0, 1}), {0}, {0}); },
              ErrorCode::kDomainMismatch);
}

TEST(Metric, ExplicitMatchesEuclidean) {
  Rng rng(4);
  std::vector<double> c(12);
  for (auto& v : c) v = static_cast<double>(UniformInt(rng, 0, 100));
  std::vector<std::vector<double>> m(12, std::vector<double>(12));
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = 0; j < 12; ++j) m[i][j] = std::abs(c[i] - c[j]);
  const auto e = MetricSpace::euclidean1d(c);
  const auto x = MetricSpace::explicit_matrix(m);
  for (PointId i = 0; i < 12; ++i) {
    for (PointId j = 0; j < 12; ++j) {
      EXPECT_EQ(e.distance(i, j), x.distance(i, j));
      for (PointId l = 0; l < 12; ++l) EXPECT_LE(x.distance(i, l), x.distance(i, j) + x.distance(j, l));
    }
  }
}

TEST(ExactEnumerators, MatchBruteForce) {
  Rng rng(6);
  for (int trial = 0; trial < 300; ++trial) {
    const KnnInstance inst = TinyInstance(rng);
    const auto u = IndexDistribution::uniform(inst.ground_size());
    for (std::size_t p = 1; p <= 3; ++p) {
      const auto table = exact_soft_loss_table(inst, u, p);
      ASSERT_EQ(table.size(), inst.pool_size());
      for (std::size_t k = 1; k <= inst.pool_size(); ++k) {
        EXPECT_NEAR(table[k - 1], BruteSoftLoss(inst, k, p), 1e-12);
        EXPECT_NEAR(exact_soft_loss(inst, u, k, p), table[k - 1], 1e-12);
      }
    }
    for (std::size_t k = 1; k <= inst.pool_size(); ++k) {
      EXPECT_NEAR(exact_hard_error(inst, u, k), BruteHardError(inst, k), 1e-12);
    }
  }
}

// Hard mistakes need err1 >= 1/2, so err_hard <= 2^p soft loss.
TEST(ExactEnumerators, HardErrorBoundedBySoft) {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const KnnInstance inst = TinyInstance(rng, 12);
    const auto u = IndexDistribution::uniform(inst.ground_size());
    for (std::size_t k = 1; k <= inst.pool_size(); ++k) {
      for (std::size_t p = 1; p <= 3; ++p) {
        EXPECT_LE(exact_hard_error(inst, u, k),
                  std::pow(2.0, static_cast<double>(p)) * exact_soft_loss(inst, u, k, p) + 1e-12);
      }
    }
  }
}

TEST(ExactEnumerators, LossMovesSlowlyInK) {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const KnnInstance inst = TinyInstance(rng, 30);
    const auto u = IndexDistribution::uniform(inst.ground_size());
    for (std::size_t p = 1; p <= 3; ++p) {
      const auto t = exact_soft_loss_table(inst, u, p);
      for (std::size_t k1 = 1; k1 <= t.size(); ++k1) {
        for (std::size_t k2 = k1; k2 <= t.size(); ++k2) {
          const double bound = static_cast<double>(p) * (1.0 - double(k1) / double(k2));
          EXPECT_LE(std::abs(t[k1 - 1] - t[k2 - 1]), bound + 1e-12);
        }
      }
    }
  }
}

TEST(SoftEstimator, ConstantTargetIsZero) {
  Rng rng(1);
  KnnInstance inst = make_line_knn(100, 40, 1, 0.0, rng);
  std::vector<Label> ones(100, 1);
  KnnInstance flat(inst.space(), inst.pool(), ones);
  auto oracle = flat.make_oracle();
  const auto est = estimate_soft_loss_pth(flat, oracle, IndexDistribution::uniform(100), 10, 2,
                                          0.1, rng);
  EXPECT_EQ(est.value, 0.0);
  EXPECT_EQ(est.iterations, 90u);
  EXPECT_EQ(est.queries_used, 270u);
  EXPECT_EQ(oracle.used(), 270u);
}

TEST(SoftEstimator, MeanMatchesExactLoss) {
  Rng rng(2);
  const KnnInstance inst = make_line_knn(200, 60, 4, 0.2, rng);
  const auto u = IndexDistribution::uniform(200);
  for (std::size_t p : {1u, 2u}) {
    const std::size_t k = 9;
    const double exact = BruteSoftLoss(inst, k, p);
    double sum = 0;
    const int runs = 200;
    for (int r = 0; r < runs; ++r) {
      auto oracle = inst.make_oracle();
      sum += estimate_soft_loss_pth(inst, oracle, u, k, p, 0.1, rng).value;
    }
    // 18000 Bernoulli rounds: standard error below 0.004
    EXPECT_NEAR(sum / runs, exact, 0.02) << "p=" << p;
  }
}

TEST(SoftEstimator, Validation) {
  Rng rng(1);
  KnnInstance inst(MetricSpace::euclidean1d({0, 1}), {0, 1}, {0, 1});
  auto oracle = inst.make_oracle();
  const auto u = IndexDistribution::uniform(2);
  ExpectError([&] { estimate_soft_loss_pth(inst, oracle, u, 3, 1, 0.1, rng); }, ErrorCode::kInvalidK);
  ExpectError([&] { estimate_soft_loss_pth(inst, oracle, u, 1, 0, 0.1, rng); },
              ErrorCode::kInvalidParameter);
  ExpectError([&] { estimate_soft_loss_pth(inst, oracle, IndexDistribution::uniform(3), 1, 1, 0.1, rng); },
              ErrorCode::kDomainMismatch);
  auto tight = inst.make_oracle(5);
  ExpectError([&] { estimate_soft_loss_pth(inst, tight, u, 1, 1, 0.1, rng); },
              ErrorCode::kBudgetExceeded);
}

TEST(Lipschitz, DrawCount) {
  // ceil(2 ln(540) / 0.04)
  EXPECT_EQ(lipschitz_draws(1.0, 0.2, 45), 315u);
  ExpectError([] { lipschitz_draws(0.0, 0.2, 45); }, ErrorCode::kInvalidParameter);
}

TEST(Lipschitz, IdentityLossMatchesSoftLoss) {
  Rng rng(3);
  const KnnInstance inst = make_line_knn(200, 60, 4, 0.2, rng);
  const auto u = IndexDistribution::uniform(200);
  const double exact = BruteSoftLoss(inst, 7, 1);
  LipschitzLoss id{[](double e) { return e; }, 1.0};
  const int n = 30;
  int ok = 0;
  for (int i = 0; i < n; ++i) {
    auto oracle = inst.make_oracle();
    const auto est = estimate_loss_lipschitz(inst, oracle, u, 7, id, 0.1, rng);
    EXPECT_EQ(est.queries_used, oracle.used());
    ok += std::abs(est.value - exact) <= 0.1;
  }
  EXPECT_GE(ok, static_cast<int>(required_successes(n, 2.0 / 3.0)));
}

// err(x) = sum_j w_j [y_j != f(x)] / sum_j w_j over the whole pool.
double BruteWeighted(const KnnInstance& inst, const NeighborWeights& w, std::size_t p) {
  double total = 0;
  for (PointId x = 0; x < inst.ground_size(); ++x) {
    const auto order = BruteOrder(inst, x);
    double num = 0, den = 0;
    for (std::size_t r = 0; r < order.size(); ++r) {
      const PointId y = inst.pool()[order[r]];
      const double wt = w(inst.space().distance(x, y), r);
      den += wt;
      num += wt * (inst.label(y) != inst.label(x));
    }
    total += std::pow(num / den, p);
  }
  return total / static_cast<double>(inst.ground_size());
}

TEST(WeightedNn, ExactMatchesBrute) {
  Rng rng(9);
  const NeighborWeights inv = [](double d, std::size_t) { return 1.0 / (1.0 + d); };
  const NeighborWeights first3 = [](double, std::size_t r) { return r < 3 ? 1.0 : 0.0; };
  for (int trial = 0; trial < 200; ++trial) {
    const KnnInstance inst = TinyInstance(rng);
    const auto u = IndexDistribution::uniform(inst.ground_size());
    for (std::size_t p = 1; p <= 2; ++p) {
      EXPECT_NEAR(exact_weighted_loss(inst, inv, u, p), BruteWeighted(inst, inv, p), 1e-12);
      EXPECT_NEAR(exact_weighted_loss(inst, first3, u, p), BruteWeighted(inst, first3, p), 1e-12);
    }
  }
}

TEST(WeightedNn, EstimatorAccuracy) {
  Rng rng(10);
  const KnnInstance inst = make_line_knn(150, 50, 3, 0.2, rng);
  const auto u = IndexDistribution::uniform(150);
  const NeighborWeights inv = [](double d, std::size_t) { return 1.0 / (1.0 + 50.0 * d); };
  const double exact = BruteWeighted(inst, inv, 2);
  const int n = 30;
  int ok = 0;
  for (int i = 0; i < n; ++i) {
    auto oracle = inst.make_oracle();
    const auto est = estimate_weighted_nn_loss(inst, oracle, inv, u, 2, 0.1, rng);
    EXPECT_EQ(est.queries_used, 270u);
    ok += std::abs(est.value - exact) <= 0.1;
  }
  EXPECT_GE(ok, static_cast<int>(required_successes(n, 2.0 / 3.0)));
}

TEST(WeightedNn, DegenerateWeights) {
  Rng rng(1);
  KnnInstance inst(MetricSpace::euclidean1d({0, 1}), {0, 1}, {0, 1});
  auto oracle = inst.make_oracle();
  const auto u = IndexDistribution::uniform(2);
  ExpectError([&] {
    estimate_weighted_nn_loss(inst, oracle, [](double, std::size_t) { return 0.0; }, u, 1, 0.1, rng);
  }, ErrorCode::kDegenerateWeights);
  ExpectError([&] {
    estimate_weighted_nn_loss(inst, oracle, [](double, std::size_t) { return -1.0; }, u, 1, 0.1, rng);
  }, ErrorCode::kDegenerateWeights);
}

TEST(HardEstimator, QueryCount) {
  Rng rng(11);
  const KnnInstance inst = make_line_knn(400, 100, 4, 0.1, rng);
  auto oracle = inst.make_oracle();
  const auto est = estimate_hard_error(inst, oracle, IndexDistribution::uniform(400), 25, 0.1, rng);
  EXPECT_EQ(est.queries_used, 90u * 26u);
}

// Ground {0,1,10,11} labeled 0 1 0 1, pool holds only the 0-labeled points:
// 1-NN misclassifies exactly half the ground set.
TEST(HardEstimator, HalfMisclassified) {
  KnnInstance inst(MetricSpace::euclidean1d({0, 1, 10, 11}), {0, 2}, {0, 1, 0, 1});
  const auto u = IndexDistribution::uniform(4);
  EXPECT_DOUBLE_EQ(exact_hard_error(inst, u, 1), 0.5);
  Rng rng(12);
  const int n = 100;
  int ok = 0;
  for (int i = 0; i < n; ++i) {
    auto oracle = inst.make_oracle();
    ok += std::abs(estimate_hard_error(inst, oracle, u, 1, 0.1, rng).value - 0.5) <= 0.1;
  }
  EXPECT_GE(ok, static_cast<int>(required_successes(n, 2.0 / 3.0)));
}

TEST(BestKGrid, Examples) {
  const auto g = best_k_grid(100, 1, 0.3);
  EXPECT_DOUBLE_EQ(g.ratio, 1.0 / 0.9);
  EXPECT_EQ(g.t, 43u);
  EXPECT_EQ(g.ks.front(), 1u);
  EXPECT_EQ(g.ks.back(), 93u);  // ceil(r^43)
  EXPECT_TRUE(std::is_sorted(g.ks.begin(), g.ks.end()));
  EXPECT_EQ(best_k_grid(1, 2, 0.3).ks, std::vector<std::size_t>{1});
  ExpectError([] { best_k_grid(0, 1, 0.3); }, ErrorCode::kInvalidParameter);
}

// Every k in [1,N] has a grid point k' <= k with k'/k >= 1/r, up to rounding.
TEST(BestKGrid, CoversEveryK) {
  for (std::size_t n : {1u, 7u, 100u, 1000u}) {
    for (std::size_t p : {1u, 2u, 3u}) {
      for (double eps : {0.05, 0.3}) {
        const auto g = best_k_grid(n, p, eps);
        for (std::size_t k = 1; k <= n; ++k) {
          auto it = std::upper_bound(g.ks.begin(), g.ks.end(), k);
          ASSERT_NE(it, g.ks.begin());
          const double below = static_cast<double>(*(it - 1));
          EXPECT_GE(below * g.ratio + 1.0, static_cast<double>(k)) << n << " " << k;
        }
      }
    }
  }
}

TEST(BestK, NearOptimal) {
  Rng rng(13);
  const KnnInstance inst = make_line_knn(300, 80, 3, 0.15, rng);
  const auto u = IndexDistribution::uniform(300);
  const auto table = exact_soft_loss_table(inst, u, 1);
  const double best = *std::min_element(table.begin(), table.end());
  const int n = 10;
  int ok = 0;
  for (int i = 0; i < n; ++i) {
    auto oracle = inst.make_oracle();
    const auto r = best_k(inst, oracle, u, 1, 0.3, rng);
    EXPECT_EQ(r.queries_used, oracle.used());
    EXPECT_EQ(r.table.size(), r.grid.ks.size());
    ok += table[r.k_star - 1] - best <= 0.3;
  }
  EXPECT_GE(ok, static_cast<int>(required_successes(n, 2.0 / 3.0)));
}

}  // namespace
}  // namespace activetest
