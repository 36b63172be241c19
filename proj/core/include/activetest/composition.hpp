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

// Compositions of additive properties over m disjoint blocks.
//
// A hypothesis assigns each block i a complexity k_i and must restrict to a
// member of that block's class C_i^{k_i}; the total sum k_i is budgeted by d
// and, when truncated, every k_i is capped by t. This header provides the
// exact truncated-composition distance (per-block costs + knapsack), the
// block-subsampling distance approximation built on it, and the
// disjoint-union estimator that averages per-block estimates.

#ifndef ACTIVETEST_COMPOSITION_HPP_
#define ACTIVETEST_COMPOSITION_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "activetest/core.hpp"

namespace activetest {

/// Block structure plus per-block class costs.
///
/// `block_costs(i, sample_i, max_k)` returns c[0..max_k], where c[k] is the
/// minimal disagreement weight between sample_i's labels and any member of
/// C_i^k. The table must be non-increasing in k, and c[0] must exist
/// (C_i^0 is never empty).
struct CompositionSpec {
  std::size_t blocks = 0;
  std::function<std::size_t(double)> block_of;
  std::function<std::vector<double>(std::size_t block,
                                    const WeightedSample& block_sample,
                                    std::size_t max_k)>
      block_costs;
};

/// Total budget d (floored to an integer cap) and per-block cap t.
struct TruncatedBudget {
  double d = 0.0;
  std::size_t t = 0;
};

struct CompositionFit {
  double distance = 0.0;
  std::vector<std::size_t> allocation;  // k_i per block
};

/// Splits a sample into per-block samples; weights are kept as-is.
/// Throws kPartitionViolation when block_of maps a point outside [0, blocks).
std::vector<WeightedSample> partition_by_block(const WeightedSample& sample,
                                               const CompositionSpec& spec);

/// min over k_i <= t, sum k_i <= cap of sum_i costs[i][k_i]. Cost tables may
/// be shorter than t+1; a block cannot be given more than its table allows.
CompositionFit knapsack_allocate(std::span<const std::vector<double>> costs,
                                 std::size_t cap, std::size_t t);

/// Exact distance from the sample's labels to the truncated composition
/// P^t(d): per-block cost tables followed by a knapsack over blocks,
/// O(m * d * t) table operations. The result is a total weight, so it equals
/// a distance when the sample is normalized.
CompositionFit distance_to_truncated_composition(const WeightedSample& sample,
                                                 const CompositionSpec& spec,
                                                 const TruncatedBudget& budget);

/// Toy block class used in tests: C_i^k = labelings with at most k distinct
/// positive points in block i.
CompositionSpec at_most_k_ones_spec(std::size_t blocks,
                                    std::function<std::size_t(double)> block_of);

/// l of {0..m-1} uniformly without replacement, ascending.
std::vector<std::size_t> choose_blocks(std::size_t m, std::size_t l, Rng& rng);

/// Smallest pool size P such that Bin(P, hit_probability) >= hits with
/// probability >= 1 - failure, via the multiplicative Chernoff lower tail.
std::size_t hits_pool_requirement(std::size_t hits, double hit_probability,
                                  double failure = 1.0 / 12.0);

// ---------------------------------------------------------------------------
// Block-subsampling distance approximation.
// ---------------------------------------------------------------------------

struct CompositionDaConfig {
  /// l = min(m, ceil(block_constant * (1/(eps mu^2) + 1/eps^2))).
  double block_constant = 1.0;
  std::optional<std::size_t> blocks_override;
  /// Median repetitions inside the oracle; 0 means median_repetitions(1/12).
  std::size_t repetitions = 0;
  /// Labeled points per oracle repetition. Defaults to the agnostic
  /// uniform-convergence size label_constant * 2d' ln(2/eps) / (eps/2)^2.
  std::optional<std::size_t> labels_per_repetition;
  double label_constant = 0.05;
};

struct CompositionDaPlan {
  std::size_t blocks = 0;           // m
  std::size_t chosen = 0;           // l
  double oracle_budget_real = 0.0;  // (1 + mu/2) lambda l
  std::size_t oracle_budget = 0;    // floored
  double truncation_real = 0.0;     // 4 lambda / eps
  std::size_t truncation = 0;       // floored
  double oracle_accuracy = 0.0;     // eps / 2
  std::size_t repetitions = 0;
  std::size_t labels_per_repetition = 0;
  std::size_t pool_required = 0;
};

CompositionDaPlan plan_composition_da(std::size_t m, double lambda, double eps,
                                      double mu,
                                      const CompositionDaConfig& config = {});

struct CompositionDaResult {
  double estimate = 0.0;
  std::uint64_t queries_used = 0;
  std::size_t unlabeled_used = 0;
  CompositionDaPlan plan;
  std::vector<std::size_t> chosen_blocks;
  std::vector<double> repetition_estimates;
  /// Labeled sample and fit of the repetition whose value is the median;
  /// block indices in the fit are local (position in chosen_blocks).
  WeightedSample median_sample;
  CompositionFit median_fit;
};

/// (eps, mu)-bi-criteria distance approximation to P(lambda m) on a
/// semi-uniform pool: picks l blocks, labels points from the pool that land
/// in them, and reports the median over repetitions of the exact distance to
/// P^t((1 + mu/2) lambda l) with t = 4 lambda / eps.
CompositionDaResult composition_da(LinePool& pool, const CompositionSpec& spec,
                                   double lambda, double eps, double mu,
                                   Rng& rng,
                                   const CompositionDaConfig& config = {});

// ---------------------------------------------------------------------------
// Disjoint unions of properties with unknown block masses.
// ---------------------------------------------------------------------------

/// Distance approximation for one block's class, working from the pool
/// points of that block only. Must answer within `eps` of the conditional
/// distance w.p. >= 2/3.
using BlockDa =
    std::function<double(std::size_t block, LineSlice& slice, double eps, Rng& rng)>;

struct UnionDaConfig {
  /// Pool points consumed by one per-block run (the per-block algorithm's
  /// unlabeled complexity).
  std::size_t points_per_run = 200;
  std::optional<std::size_t> index_draws;  // s; default chernoff(eps/2, 1/9)
  std::optional<std::size_t> repetitions;  // default median_repetitions(1/(9s))
};

struct UnionDaResult {
  double estimate = 0.0;
  std::uint64_t queries_used = 0;
  std::size_t unlabeled_used = 0;
  std::size_t index_draws = 0;
  std::size_t repetitions = 0;
  std::vector<std::size_t> drawn_blocks;
  /// Boosted estimate per block; nullopt when the block was not drawn or had
  /// too few pool points (then it contributed 0).
  std::vector<std::optional<double>> block_estimates;
};

/// Minimum pool size so that every block of mass >= `min_mass` receives
/// repetitions * points_per_run points w.p. >= 1 - failure/m (per block).
std::size_t union_pool_requirement(std::size_t blocks, double min_mass, double eps,
                                   const UnionDaConfig& config,
                                   double failure = 1.0 / 9.0);

UnionDaResult disjoint_union_da(LinePool& pool, std::size_t blocks,
                                const std::function<std::size_t(double)>& block_of,
                                const BlockDa& per_block_da, double eps, Rng& rng,
                                const UnionDaConfig& config = {});

}  // namespace activetest

#endif  // ACTIVETEST_COMPOSITION_HPP_
