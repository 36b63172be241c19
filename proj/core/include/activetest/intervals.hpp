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

// Unions of at most d intervals on the line: exact empirical distance,
// the shortest-interval shrink, and the active distance approximation that
// is uniform-first and lifted to unknown distributions by the rank map.

#ifndef ACTIVETEST_INTERVALS_HPP_
#define ACTIVETEST_INTERVALS_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "activetest/composition.hpp"
#include "activetest/core.hpp"

namespace activetest {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const noexcept { return hi - lo; }
};

/// Sorted, disjoint, non-adjacent closed intervals (hi_i < lo_{i+1}).
class IntervalUnion {
 public:
  IntervalUnion() = default;
  /// Validates the representation; throws kInvalidParameter otherwise.
  explicit IntervalUnion(std::vector<Interval> intervals);
  /// Sorts and merges overlapping or touching intervals.
  static IntervalUnion normalize(std::vector<Interval> intervals);

  std::size_t size() const noexcept { return intervals_.size(); }
  bool empty() const noexcept { return intervals_.empty(); }
  const std::vector<Interval>& intervals() const noexcept { return intervals_; }
  bool contains(double x) const noexcept;
  Label label(double x) const noexcept { return contains(x) ? 1 : 0; }
  /// Lebesgue measure of the union intersected with [0,1].
  double measure01() const noexcept;

 private:
  std::vector<Interval> intervals_;
};

struct IntervalFit {
  double alpha = 0.0;
  IntervalUnion witness;
};

/// Minimum weighted disagreement between the sample labels and any union of
/// at most d intervals, plus a witness. Dynamic program over the sorted
/// distinct points with state (intervals opened, inside/outside).
IntervalFit exact_distance_to_intervals(const WeightedSample& sample, long long d);

/// c[0..max_k]: the exact distance for every budget k <= max_k, from one DP
/// pass. An empty sample gives all zeros.
std::vector<double> interval_costs_by_budget(const WeightedSample& sample,
                                             std::size_t max_k);

/// Drops the max(ceil(eps k / 2), k - d) shortest intervals of g when it has
/// k > d intervals; no-op otherwise. Needs d > 2/eps.
IntervalUnion shrink_interval_union(const IntervalUnion& g, std::size_t d, double eps);

/// Blocks of [0,1]: [0, 1/m] then ((i-1)/m, i/m]; block costs are interval DPs.
CompositionSpec interval_block_spec(std::size_t m);
std::size_t interval_block_of(double x, std::size_t m) noexcept;

struct DaResult {
  double alpha_hat = 0.0;
  std::uint64_t queries_used = 0;
  std::size_t unlabeled_used = 0;
  std::optional<IntervalUnion> witness;
};

struct IntervalDaConfig {
  /// Total labels = ceil(label_constant * ln(1/eps) / eps^6), rounded up to a
  /// multiple of the median repetitions. Same count in both branches.
  double label_constant = 2e-4;
  /// Unlabeled draws of interval_da: floor(c * (2d/eps^2) ln(1/eps)).
  double unlabeled_constant = 1.0;
  std::size_t repetitions = 0;  // 0: median_repetitions(1/12)
  double block_constant = 1.0;
};

struct IntervalDaPlan {
  bool agnostic = true;
  std::size_t labels = 0;
  std::size_t pool_required = 0;
  // Composition branch only.
  std::size_t m = 0;
  double lambda = 0.0;
  double lambda_prime = 0.0;
  double inner_eps = 0.0;
  double mu = 0.0;
  CompositionDaConfig composition;
};

std::size_t interval_label_budget(double eps, const IntervalDaConfig& config = {});
IntervalDaPlan plan_interval_da(double eps, std::size_t d,
                                const IntervalDaConfig& config = {});

/// Distance approximation to I(d) under uniform [0,1] with active access.
/// d <= 8/eps: agnostic ERM on the labeled prefix of the pool. Otherwise m
/// = floor(eps d / 8) equal blocks and a composition estimate for
/// P((1 + eps/8) d/m * m) at accuracy eps/2.
DaResult interval_da_uniform(LinePool& pool, double eps, std::size_t d, Rng& rng,
                             const IntervalDaConfig& config = {});

/// Rank of each point among `points`: the i-th smallest (ties by position)
/// goes to (i - 0.5)/N.
std::vector<double> rank_map(std::span<const double> points);

/// Distance approximation to I(d) under an unknown distribution: draws the
/// unlabeled sample, maps it to ranks and runs interval_da_uniform at eps/2.
DaResult interval_da(const Distribution& dist, const TargetFunction<double>& target,
                     double eps, std::size_t d, Rng& rng,
                     const IntervalDaConfig& config = {});

/// C with unlabeled_used <= C (d/eps^2) ln(1/eps) for interval_da.
double interval_unlabeled_constant(const IntervalDaConfig& config = {});

/// Uniform-weight labeled sample at the midpoints of `cells` equal cells.
WeightedSample grid_sample(std::size_t cells, const TargetFunction<double>& target);

}  // namespace activetest

#endif  // ACTIVETEST_INTERVALS_HPP_
