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

#include "activetest/composition.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <map>
#include <numeric>
#include <string>

namespace activetest {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t floor_budget(double d) {
  if (!(d >= 0.0) || !std::isfinite(d)) {
    fail(ErrorCode::kInvalidParameter, "composition budget must be finite and >= 0");
  }
  return static_cast<std::size_t>(std::floor(d + 1e-9));
}

std::size_t checked_block(const CompositionSpec& spec, double x) {
  const std::size_t b = spec.block_of(x);
  if (b >= spec.blocks) {
    fail(ErrorCode::kPartitionViolation,
         "point " + std::to_string(x) + " maps to block " + std::to_string(b) +
             " of " + std::to_string(spec.blocks));
  }
  return b;
}

void check_cost_table(const std::vector<double>& c, std::size_t block) {
  if (c.empty()) {
    fail(ErrorCode::kInvalidClassParameter,
         "block " + std::to_string(block) + " has no cost for k = 0");
  }
  for (std::size_t k = 1; k < c.size(); ++k) {
    if (c[k] > c[k - 1]) {
      fail(ErrorCode::kInvalidClassParameter,
           "block " + std::to_string(block) + " cost increases with k");
    }
  }
}

}  // namespace

std::vector<WeightedSample> partition_by_block(const WeightedSample& sample,
                                               const CompositionSpec& spec) {
  if (spec.blocks == 0 || !spec.block_of) {
    fail(ErrorCode::kInvalidClassParameter, "composition needs at least one block");
  }
  std::vector<WeightedSample> parts(spec.blocks);
  for (const auto& e : sample.entries()) {
    parts[checked_block(spec, e.point)].add(e.point, e.weight, e.label);
  }
  return parts;
}

CompositionFit knapsack_allocate(std::span<const std::vector<double>> costs,
                                 std::size_t cap, std::size_t t) {
  const std::size_t m = costs.size();
  std::vector<std::size_t> limit(m);
  std::size_t useful = 0;
  for (std::size_t i = 0; i < m; ++i) {
    check_cost_table(costs[i], i);
    limit[i] = std::min(t, costs[i].size() - 1);
    useful += limit[i];
  }
  cap = std::min(cap, useful);

  // dp[c]: least total cost of the blocks seen so far using at most c units.
  std::vector<double> dp(cap + 1, 0.0);
  std::vector<double> next(cap + 1);
  std::vector<std::vector<std::uint32_t>> choice(m, std::vector<std::uint32_t>(cap + 1));
  for (std::size_t i = 0; i < m; ++i) {
    const auto& c = costs[i];
    for (std::size_t units = 0; units <= cap; ++units) {
      double best = kInf;
      std::uint32_t arg = 0;
      const std::size_t kmax = std::min(limit[i], units);
      for (std::size_t k = 0; k <= kmax; ++k) {
        const double v = dp[units - k] + c[k];
        if (v < best) {
          best = v;
          arg = static_cast<std::uint32_t>(k);
        }
      }
      next[units] = best;
      choice[i][units] = arg;
    }
    dp.swap(next);
  }

  CompositionFit fit;
  fit.distance = m == 0 ? 0.0 : dp[cap];
  fit.allocation.assign(m, 0);
  std::size_t units = cap;
  for (std::size_t i = m; i-- > 0;) {
    fit.allocation[i] = choice[i][units];
    units -= fit.allocation[i];
  }
  return fit;
}

CompositionFit distance_to_truncated_composition(const WeightedSample& sample,
                                                 const CompositionSpec& spec,
                                                 const TruncatedBudget& budget) {
  if (!spec.block_costs) {
    fail(ErrorCode::kInvalidClassParameter, "composition spec lacks block costs");
  }
  const std::size_t cap = floor_budget(budget.d);
  const std::size_t max_k = std::min(budget.t, cap);
  const auto parts = partition_by_block(sample, spec);
  std::vector<std::vector<double>> costs(spec.blocks);
  for (std::size_t i = 0; i < spec.blocks; ++i) {
    if (parts[i].empty()) {
      // Empty restrictions are consistent with C_i^0.
      costs[i] = {0.0};
      continue;
    }
    costs[i] = spec.block_costs(i, parts[i], max_k);
    if (costs[i].size() > max_k + 1) costs[i].resize(max_k + 1);
  }
  return knapsack_allocate(costs, cap, budget.t);
}

CompositionSpec at_most_k_ones_spec(std::size_t blocks,
                                    std::function<std::size_t(double)> block_of) {
  CompositionSpec spec;
  spec.blocks = blocks;
  spec.block_of = std::move(block_of);
  spec.block_costs = [](std::size_t, const WeightedSample& s, std::size_t max_k) {
    // Group by point: a positive point costs its label-0 weight, a negative
    // one its label-1 weight. Turning a point positive gains w1 - w0.
    std::map<double, std::pair<double, double>> groups;  // point -> (w0, w1)
    for (const auto& e : s.entries()) {
      auto& g = groups[e.point];
      (e.label.value_or(0) ? g.second : g.first) += e.weight;
    }
    double base = 0.0;
    std::vector<double> gains;
    for (const auto& [x, w] : groups) {
      base += w.second;
      if (w.second > w.first) gains.push_back(w.second - w.first);
    }
    std::sort(gains.begin(), gains.end(), std::greater<>());
    std::vector<double> c(max_k + 1);
    double cur = base;
    for (std::size_t k = 0; k <= max_k; ++k) {
      if (k > 0 && k - 1 < gains.size()) cur -= gains[k - 1];
      c[k] = cur;
    }
    return c;
  };
  return spec;
}

std::vector<std::size_t> choose_blocks(std::size_t m, std::size_t l, Rng& rng) {
  if (l > m) fail(ErrorCode::kInvalidParameter, "cannot choose more blocks than exist");
  std::vector<std::size_t> all(m);
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::size_t> out;
  out.reserve(l);
  std::sample(all.begin(), all.end(), std::back_inserter(out), l, rng);
  return out;
}

std::size_t hits_pool_requirement(std::size_t hits, double hit_probability,
                                  double failure) {
  if (!(hit_probability > 0.0) || !(failure > 0.0 && failure < 1.0)) {
    fail(ErrorCode::kInvalidParameter, "hit probability and failure must be positive");
  }
  if (hits == 0) return 0;
  if (hit_probability >= 1.0) return hits;
  // P[X <= (1 - delta) mu] <= exp(-delta^2 mu / 2); solve
  // mu - sqrt(2 ln(1/failure) mu) >= hits for mu = P * q.
  const double a = std::sqrt(2.0 * std::log(1.0 / failure));
  const double y = 0.5 * (a + std::sqrt(a * a + 4.0 * static_cast<double>(hits)));
  return static_cast<std::size_t>(std::ceil(y * y / hit_probability));
}

// ---------------------------------------------------------------------------

CompositionDaPlan plan_composition_da(std::size_t m, double lambda, double eps,
                                      double mu, const CompositionDaConfig& config) {
  if (m == 0) fail(ErrorCode::kInvalidClassParameter, "composition needs blocks");
  if (!(eps > 0.0 && eps < 1.0) || !(mu > 0.0 && mu < 1.0) || !(lambda > 0.0)) {
    fail(ErrorCode::kInvalidParameter, "composition_da needs 0<eps<1, 0<mu<1, lambda>0");
  }
  CompositionDaPlan plan;
  plan.blocks = m;
  if (config.blocks_override) {
    plan.chosen = std::clamp<std::size_t>(*config.blocks_override, 1, m);
  } else {
    const double raw =
        config.block_constant * (1.0 / (eps * mu * mu) + 1.0 / (eps * eps));
    const double l = std::ceil(raw);
    plan.chosen = l >= static_cast<double>(m) ? m : std::max<std::size_t>(1, static_cast<std::size_t>(l));
  }
  const double l = static_cast<double>(plan.chosen);
  plan.oracle_budget_real = (1.0 + mu / 2.0) * lambda * l;
  plan.oracle_budget = floor_budget(plan.oracle_budget_real);
  plan.truncation_real = 4.0 * lambda / eps;
  plan.truncation = floor_budget(plan.truncation_real);
  plan.oracle_accuracy = eps / 2.0;
  plan.repetitions =
      config.repetitions ? config.repetitions : median_repetitions(1.0 / 12.0);
  if (config.labels_per_repetition) {
    plan.labels_per_repetition = *config.labels_per_repetition;
  } else {
    const double acc = plan.oracle_accuracy;
    const double vc = 2.0 * std::max<double>(1.0, static_cast<double>(plan.oracle_budget));
    plan.labels_per_repetition = static_cast<std::size_t>(
        std::ceil(config.label_constant * vc * std::log(1.0 / acc) / (acc * acc)));
  }
  plan.labels_per_repetition = std::max<std::size_t>(1, plan.labels_per_repetition);
  plan.pool_required = hits_pool_requirement(
      plan.repetitions * plan.labels_per_repetition,
      l / static_cast<double>(m));
  return plan;
}

CompositionDaResult composition_da(LinePool& pool, const CompositionSpec& spec,
                                   double lambda, double eps, double mu, Rng& rng,
                                   const CompositionDaConfig& config) {
  if (!spec.block_of || !spec.block_costs) {
    fail(ErrorCode::kInvalidClassParameter, "incomplete composition spec");
  }
  CompositionDaResult result;
  result.plan = plan_composition_da(spec.blocks, lambda, eps, mu, config);
  const auto& plan = result.plan;
  if (pool.size() < plan.pool_required) {
    fail(ErrorCode::kInsufficientPool,
         "need " + std::to_string(plan.pool_required) + " unlabeled points, have " +
             std::to_string(pool.size()));
  }
  const std::uint64_t queries_before = pool.queries_used();

  result.chosen_blocks = choose_blocks(spec.blocks, plan.chosen, rng);
  std::vector<std::ptrdiff_t> local(spec.blocks, -1);
  for (std::size_t j = 0; j < result.chosen_blocks.size(); ++j) {
    local[result.chosen_blocks[j]] = static_cast<std::ptrdiff_t>(j);
  }

  const std::size_t wanted = plan.repetitions * plan.labels_per_repetition;
  std::vector<std::size_t> hits;
  hits.reserve(wanted);
  for (std::size_t i = 0; i < plan.pool_required && hits.size() < wanted; ++i) {
    if (local[checked_block(spec, pool.point(i))] >= 0) hits.push_back(i);
  }
  result.unlabeled_used = plan.pool_required;

  // Fewer hits than wanted is the Chernoff failure event; spread what we have.
  const std::size_t per_rep = hits.size() / plan.repetitions;
  if (per_rep == 0) {
    result.estimate = 0.0;
    return result;
  }

  CompositionSpec local_spec;
  local_spec.blocks = result.chosen_blocks.size();
  local_spec.block_of = [&](double x) {
    return static_cast<std::size_t>(local[spec.block_of(x)]);
  };
  local_spec.block_costs = [&](std::size_t j, const WeightedSample& s,
                               std::size_t max_k) {
    return spec.block_costs(result.chosen_blocks[j], s, max_k);
  };
  const TruncatedBudget budget{static_cast<double>(plan.oracle_budget),
                               plan.truncation};

  std::vector<WeightedSample> samples;
  std::vector<CompositionFit> fits;
  samples.reserve(plan.repetitions);
  fits.reserve(plan.repetitions);
  const double w = 1.0 / static_cast<double>(per_rep);
  for (std::size_t r = 0; r < plan.repetitions; ++r) {
    WeightedSample s;
    for (std::size_t j = 0; j < per_rep; ++j) {
      const std::size_t idx = hits[r * per_rep + j];
      s.add(pool.point(idx), w, pool.query(idx));
    }
    fits.push_back(distance_to_truncated_composition(s, local_spec, budget));
    result.repetition_estimates.push_back(fits.back().distance);
    samples.push_back(std::move(s));
  }

  std::vector<std::size_t> order(fits.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return fits[a].distance < fits[b].distance;
  });
  const std::size_t med = order[(order.size() - 1) / 2];
  result.estimate = fits[med].distance;
  result.median_fit = std::move(fits[med]);
  result.median_sample = std::move(samples[med]);
  result.queries_used = pool.queries_used() - queries_before;
  return result;
}

// ---------------------------------------------------------------------------

std::size_t union_pool_requirement(std::size_t blocks, double min_mass, double eps,
                                   const UnionDaConfig& config, double failure) {
  if (blocks == 0) fail(ErrorCode::kInvalidParameter, "union needs blocks");
  const std::size_t s =
      config.index_draws ? *config.index_draws : chernoff_iterations(eps / 2.0, 1.0 / 9.0);
  const std::size_t reps =
      config.repetitions ? *config.repetitions
                         : median_repetitions(1.0 / (9.0 * static_cast<double>(s)));
  return s + hits_pool_requirement(reps * config.points_per_run, min_mass,
                                   failure / static_cast<double>(blocks));
}

UnionDaResult disjoint_union_da(LinePool& pool, std::size_t blocks,
                                const std::function<std::size_t(double)>& block_of,
                                const BlockDa& per_block_da, double eps, Rng& rng,
                                const UnionDaConfig& config) {
  if (!(eps > 0.0 && eps < 1.0)) {
    fail(ErrorCode::kInvalidParameter, "disjoint_union_da needs 0<eps<1");
  }
  if (blocks == 0 || !block_of || !per_block_da || config.points_per_run == 0) {
    fail(ErrorCode::kInvalidParameter, "disjoint_union_da needs blocks and a block DA");
  }
  UnionDaResult result;
  result.index_draws =
      config.index_draws ? *config.index_draws : chernoff_iterations(eps / 2.0, 1.0 / 9.0);
  result.repetitions =
      config.repetitions
          ? *config.repetitions
          : median_repetitions(1.0 / (9.0 * static_cast<double>(result.index_draws)));
  const std::size_t s = result.index_draws;
  if (pool.size() < s) {
    fail(ErrorCode::kInsufficientPool, "pool smaller than the block-index draws");
  }
  auto block_at = [&](std::size_t i) {
    const std::size_t b = block_of(pool.point(i));
    if (b >= blocks) fail(ErrorCode::kPartitionViolation, "point outside every block");
    return b;
  };

  // The first s points only reveal which block a fresh draw lands in.
  result.drawn_blocks.reserve(s);
  for (std::size_t j = 0; j < s; ++j) result.drawn_blocks.push_back(block_at(j));

  std::vector<std::vector<std::size_t>> members(blocks);
  for (std::size_t i = s; i < pool.size(); ++i) members[block_at(i)].push_back(i);

  const std::uint64_t queries_before = pool.queries_used();
  const std::size_t n = config.points_per_run;
  const std::size_t needed = result.repetitions * n;
  result.block_estimates.assign(blocks, std::nullopt);
  std::vector<bool> done(blocks, false);
  double total = 0.0;
  for (std::size_t b : result.drawn_blocks) {
    if (!done[b]) {
      done[b] = true;
      // Repeated draws of a block reuse its boosted estimate: the union
      // bound over the s draws does not need the estimates independent.
      if (members[b].size() >= needed) {
        std::vector<double> runs;
        runs.reserve(result.repetitions);
        for (std::size_t r = 0; r < result.repetitions; ++r) {
          LineSlice slice(pool, std::span<const std::size_t>(members[b]).subspan(r * n, n));
          runs.push_back(per_block_da(b, slice, eps / 2.0, rng));
        }
        result.block_estimates[b] = median(std::move(runs));
      }
    }
    total += result.block_estimates[b].value_or(0.0);
  }
  result.estimate = total / static_cast<double>(s);
  result.queries_used = pool.queries_used() - queries_before;
  result.unlabeled_used = pool.size();
  return result;
}

}  // namespace activetest
