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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "activetest/reduction.hpp"

namespace activetest {

IntervalUnion::IntervalUnion(std::vector<Interval> intervals)
    : intervals_(std::move(intervals)) {
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    const auto& iv = intervals_[i];
    if (!(iv.lo <= iv.hi)) {
      fail(ErrorCode::kInvalidParameter, "interval with lo > hi");
    }
    if (i > 0 && !(intervals_[i - 1].hi < iv.lo)) {
      fail(ErrorCode::kInvalidParameter,
           "intervals must be sorted, disjoint and non-adjacent");
    }
  }
}

IntervalUnion IntervalUnion::normalize(std::vector<Interval> intervals) {
  for (const auto& iv : intervals) {
    if (!(iv.lo <= iv.hi)) fail(ErrorCode::kInvalidParameter, "interval with lo > hi");
  }
  std::sort(intervals.begin(), intervals.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> merged;
  for (const auto& iv : intervals) {
    if (!merged.empty() && iv.lo <= merged.back().hi) {
      merged.back().hi = std::max(merged.back().hi, iv.hi);
    } else {
      merged.push_back(iv);
    }
  }
  return IntervalUnion(std::move(merged));
}

bool IntervalUnion::contains(double x) const noexcept {
  // First interval with lo > x; the candidate is the one before it.
  auto it = std::upper_bound(intervals_.begin(), intervals_.end(), x,
                             [](double v, const Interval& iv) { return v < iv.lo; });
  if (it == intervals_.begin()) return false;
  --it;
  return x <= it->hi;
}

double IntervalUnion::measure01() const noexcept {
  double m = 0.0;
  for (const auto& iv : intervals_) {
    m += std::max(0.0, std::min(iv.hi, 1.0) - std::max(iv.lo, 0.0));
  }
  return m;
}

// ---------------------------------------------------------------------------
// DP

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Grouped {
  std::vector<double> x;
  std::vector<double> w0;  // weight labeled 0: cost if covered
  std::vector<double> w1;  // weight labeled 1: cost if not covered
};

Grouped group_points(const WeightedSample& sample) {
  std::vector<std::size_t> order(sample.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sample[a].point < sample[b].point;
  });
  Grouped g;
  for (std::size_t idx : order) {
    const auto& e = sample[idx];
    if (!e.label) fail(ErrorCode::kInvalidParameter, "interval DP needs labels");
    if (g.x.empty() || g.x.back() != e.point) {
      g.x.push_back(e.point);
      g.w0.push_back(0.0);
      g.w1.push_back(0.0);
    }
    (*e.label ? g.w1.back() : g.w0.back()) += e.weight;
  }
  return g;
}

// in[j]/out[j]: best cost so far with exactly j runs opened, currently
// covering / not covering the last group.
struct DpOutput {
  std::vector<double> in;
  std::vector<double> out;
  std::vector<std::uint8_t> back;  // per (group, j): bit0 in<-in, bit1 out<-in
};

DpOutput run_dp(const Grouped& g, std::size_t k, bool keep_back) {
  const std::size_t n = g.x.size();
  DpOutput r;
  r.in.assign(k + 1, kInf);
  r.out.assign(k + 1, kInf);
  r.out[0] = 0.0;
  if (keep_back) r.back.assign(n * (k + 1), 0);
  std::vector<double> in2(k + 1), out2(k + 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= k; ++j) {
      std::uint8_t b = 0;
      // Cover group i: stay in the current run or open run j.
      const double stay = r.in[j];
      const double open = j > 0 ? r.out[j - 1] : kInf;
      if (stay <= open) b |= 1;
      in2[j] = std::min(stay, open) + g.w0[i];
      double skip = r.out[j];
      if (r.in[j] < skip) {
        skip = r.in[j];
        b |= 2;
      }
      out2[j] = skip + g.w1[i];
      if (keep_back) r.back[i * (k + 1) + j] = b;
    }
    in2[0] = kInf;
    r.in.swap(in2);
    r.out.swap(out2);
  }
  return r;
}

std::size_t useful_budget(std::size_t groups, std::size_t d) {
  return std::min(d, (groups + 1) / 2);
}

}  // namespace

IntervalFit exact_distance_to_intervals(const WeightedSample& sample, long long d) {
  if (d < 0) {
    fail(ErrorCode::kInvalidClassParameter, "d must be a nonnegative integer");
  }
  if (sample.empty()) fail(ErrorCode::kInvalidParameter, "empty sample");
  const Grouped g = group_points(sample);
  const std::size_t n = g.x.size();
  const std::size_t k = useful_budget(n, static_cast<std::size_t>(d));
  const DpOutput r = run_dp(g, k, true);

  double best = kInf;
  std::size_t bj = 0;
  bool inside = false;
  for (std::size_t j = 0; j <= k; ++j) {
    if (r.out[j] < best) {
      best = r.out[j];
      bj = j;
      inside = false;
    }
    if (r.in[j] < best) {
      best = r.in[j];
      bj = j;
      inside = true;
    }
  }

  std::vector<bool> covered(n, false);
  std::size_t j = bj;
  for (std::size_t i = n; i-- > 0;) {
    const std::uint8_t b = r.back[i * (k + 1) + j];
    covered[i] = inside;
    if (inside) {
      if (!(b & 1)) {
        --j;
        inside = false;
      }
    } else {
      inside = (b & 2) != 0;
    }
  }

  std::vector<Interval> runs;
  for (std::size_t i = 0; i < n; ++i) {
    if (!covered[i]) continue;
    if (i > 0 && covered[i - 1]) {
      runs.back().hi = g.x[i];
    } else {
      runs.push_back({g.x[i], g.x[i]});
    }
  }
  return {best, IntervalUnion(std::move(runs))};
}

std::vector<double> interval_costs_by_budget(const WeightedSample& sample,
                                             std::size_t max_k) {
  std::vector<double> c(max_k + 1, 0.0);
  if (sample.empty()) return c;
  const Grouped g = group_points(sample);
  const std::size_t k = useful_budget(g.x.size(), max_k);
  const DpOutput r = run_dp(g, k, false);
  double best = kInf;
  for (std::size_t j = 0; j <= max_k; ++j) {
    if (j <= k) best = std::min({best, r.in[j], r.out[j]});
    c[j] = best;
  }
  return c;
}

IntervalUnion shrink_interval_union(const IntervalUnion& g, std::size_t d, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) fail(ErrorCode::kInvalidParameter, "eps outside (0,1)");
  if (static_cast<double>(d) * eps <= 2.0 + 1e-12) {
    fail(ErrorCode::kRegimeViolation, "shrink needs d > 2/eps");
  }
  const std::size_t k = g.size();
  if (k <= d) return g;
  const auto by_eps = static_cast<std::size_t>(std::ceil(eps * static_cast<double>(k) / 2.0 - 1e-12));
  const std::size_t remove = std::min(k, std::max(by_eps, k - d));

  const auto& ivs = g.intervals();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ivs[a].length() < ivs[b].length();
  });
  std::vector<bool> drop(k, false);
  for (std::size_t i = 0; i < remove; ++i) drop[order[i]] = true;
  std::vector<Interval> kept;
  for (std::size_t i = 0; i < k; ++i) {
    if (!drop[i]) kept.push_back(ivs[i]);
  }
  return IntervalUnion(std::move(kept));
}

std::size_t interval_block_of(double x, std::size_t m) noexcept {
  const double scaled = std::ceil(x * static_cast<double>(m)) - 1.0;
  if (!(scaled > 0.0)) return 0;
  return std::min(m - 1, static_cast<std::size_t>(scaled));
}

CompositionSpec interval_block_spec(std::size_t m) {
  if (m == 0) fail(ErrorCode::kInvalidClassParameter, "need at least one block");
  CompositionSpec spec;
  spec.blocks = m;
  spec.block_of = [m](double x) { return interval_block_of(x, m); };
  spec.block_costs = [](std::size_t, const WeightedSample& s, std::size_t max_k) {
    return interval_costs_by_budget(s, max_k);
  };
  return spec;
}

// ---------------------------------------------------------------------------
// Distance approximation

namespace {

void check_da_eps(double eps) {
  if (!(eps > 0.0 && eps < 0.5)) {
    fail(ErrorCode::kInvalidParameter, "interval DA needs 0 < eps < 1/2");
  }
}

std::size_t reps_of(const IntervalDaConfig& config) {
  return config.repetitions ? config.repetitions : median_repetitions(1.0 / 12.0);
}

}  // namespace

std::size_t interval_label_budget(double eps, const IntervalDaConfig& config) {
  check_da_eps(eps);
  if (!(config.label_constant > 0.0)) {
    fail(ErrorCode::kInvalidParameter, "label_constant must be positive");
  }
  const double raw = config.label_constant * std::log(1.0 / eps) / std::pow(eps, 6);
  const std::size_t reps = reps_of(config);
  auto n = static_cast<std::size_t>(std::ceil(raw));
  n = std::max(n, reps);
  return (n + reps - 1) / reps * reps;
}

IntervalDaPlan plan_interval_da(double eps, std::size_t d, const IntervalDaConfig& config) {
  check_da_eps(eps);
  IntervalDaPlan plan;
  plan.labels = interval_label_budget(eps, config);
  if (static_cast<double>(d) * eps <= 8.0 + 1e-9) {
    plan.agnostic = true;
    plan.pool_required = plan.labels;
    return plan;
  }
  plan.agnostic = false;
  plan.m = static_cast<std::size_t>(std::floor(eps * static_cast<double>(d) / 8.0 + 1e-9));
  plan.lambda = static_cast<double>(d) / static_cast<double>(plan.m);
  plan.lambda_prime = (1.0 + eps / 8.0) * plan.lambda;
  plan.inner_eps = eps / 2.0;
  plan.mu = (1.0 + eps / 4.0) / (1.0 + eps / 8.0) - 1.0;
  const std::size_t reps = reps_of(config);
  plan.composition.block_constant = config.block_constant;
  plan.composition.repetitions = reps;
  plan.composition.labels_per_repetition = plan.labels / reps;
  plan.pool_required =
      plan_composition_da(plan.m, plan.lambda_prime, plan.inner_eps, plan.mu,
                          plan.composition)
          .pool_required;
  return plan;
}

DaResult interval_da_uniform(LinePool& pool, double eps, std::size_t d, Rng& rng,
                             const IntervalDaConfig& config) {
  const IntervalDaPlan plan = plan_interval_da(eps, d, config);
  if (pool.size() < plan.pool_required) {
    fail(ErrorCode::kInsufficientPool,
         "need " + std::to_string(plan.pool_required) + " unlabeled points, have " +
             std::to_string(pool.size()));
  }
  DaResult result;
  const std::uint64_t before = pool.queries_used();

  if (plan.agnostic) {
    WeightedSample s;
    const double w = 1.0 / static_cast<double>(plan.labels);
    for (std::size_t i = 0; i < plan.labels; ++i) s.add(pool.point(i), w, pool.query(i));
    IntervalFit fit = exact_distance_to_intervals(s, static_cast<long long>(d));
    result.alpha_hat = std::clamp(fit.alpha, 0.0, 1.0);
    result.witness = std::move(fit.witness);
    result.unlabeled_used = plan.labels;
    result.queries_used = pool.queries_used() - before;
    return result;
  }

  const CompositionSpec spec = interval_block_spec(plan.m);
  CompositionDaResult comp = composition_da(pool, spec, plan.lambda_prime, plan.inner_eps,
                                            plan.mu, rng, plan.composition);
  result.alpha_hat = std::clamp(comp.estimate, 0.0, 1.0);
  result.queries_used = pool.queries_used() - before;
  result.unlabeled_used = comp.unlabeled_used;

  // With every block chosen the median fit is a full hypothesis; cut it back
  // to d intervals.
  if (comp.chosen_blocks.size() == plan.m && !comp.median_sample.empty()) {
    const auto parts = partition_by_block(comp.median_sample, spec);
    std::vector<Interval> pieces;
    for (std::size_t b = 0; b < plan.m; ++b) {
      if (parts[b].empty() || comp.median_fit.allocation[b] == 0) continue;
      const IntervalFit f = exact_distance_to_intervals(
          parts[b], static_cast<long long>(comp.median_fit.allocation[b]));
      pieces.insert(pieces.end(), f.witness.intervals().begin(),
                    f.witness.intervals().end());
    }
    result.witness = shrink_interval_union(IntervalUnion(std::move(pieces)), d, eps);
  }
  return result;
}

std::vector<double> rank_map(std::span<const double> points) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
  std::vector<double> ranks(points.size());
  const double n = static_cast<double>(points.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    ranks[order[pos]] = (static_cast<double>(pos) + 0.5) / n;
  }
  return ranks;
}

double interval_unlabeled_constant(const IntervalDaConfig& config) {
  return 2.0 * config.unlabeled_constant;
}

DaResult interval_da(const Distribution& dist, const TargetFunction<double>& target,
                     double eps, std::size_t d, Rng& rng, const IntervalDaConfig& config) {
  check_da_eps(eps);
  const IntervalDaPlan inner = plan_interval_da(eps / 2.0, d, config);

  QueryAlgorithm<DaResult> alg;
  alg.declared_queries = inner.labels;
  alg.run = [&](QueryContext& ctx) {
    const std::size_t n = ctx.support.size();
    std::vector<double> pts(n);
    for (std::size_t i = 0; i < n; ++i) pts[i] = ctx.support[i].point;
    const std::vector<double> ranks = rank_map(pts);
    std::vector<std::size_t> atom_at(n);  // rank position -> atom index
    for (std::size_t i = 0; i < n; ++i) {
      atom_at[static_cast<std::size_t>(std::llround(ranks[i] * static_cast<double>(n) - 0.5))] = i;
    }
    // The rank-uniform instance: i.i.d. draws from the N ranks.
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<double> draws(inner.pool_required);
    for (auto& r : draws) r = (static_cast<double>(pick(ctx.rng)) + 0.5) / static_cast<double>(n);
    LineOracle through([&](double r) {
      auto pos = static_cast<std::size_t>(std::llround(r * static_cast<double>(n) - 0.5));
      return ctx.atoms.query(atom_at[std::min(pos, n - 1)]);
    });
    LinePool inner_pool(std::move(draws), std::move(through));
    DaResult r = interval_da_uniform(inner_pool, ctx.eps, d, ctx.rng, config);
    r.witness.reset();  // lives in rank space
    return r;
  };

  auto red = activeize_da(alg, 2 * std::max<std::size_t>(d, 1), eps, dist, target, rng,
                          config.unlabeled_constant);
  DaResult out = std::move(red.output);
  out.queries_used = red.queries_used;
  out.unlabeled_used = red.unlabeled_used;
  return out;
}

WeightedSample grid_sample(std::size_t cells, const TargetFunction<double>& target) {
  if (cells == 0) fail(ErrorCode::kInvalidParameter, "grid needs cells");
  WeightedSample s;
  const double w = 1.0 / static_cast<double>(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(cells);
    s.add(x, w, target(x));
  }
  return s;
}

}  // namespace activetest
