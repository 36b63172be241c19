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

#include "activetest/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

namespace activetest {

ArmSet::ArmSet(std::vector<double> means, double gamma)
    : means_(std::move(means)), pulls_(means_.size(), 0), gamma_(gamma) {
  if (!(gamma >= 0.0 && gamma <= 0.5)) {
    fail(ErrorCode::kInvalidParameter, "gamma must lie in [0, 1/2]");
  }
  for (double mu : means_) {
    if (!(mu >= 0.0 && mu <= 1.0)) fail(ErrorCode::kInvalidParameter, "arm mean outside [0,1]");
    if (gamma > 0.0 && mu < 0.5 + gamma - 1e-12 && mu > 0.5 - gamma + 1e-12) {
      fail(ErrorCode::kInvalidParameter,
           "arm mean " + std::to_string(mu) + " inside the gap");
    }
  }
}

std::uint64_t ArmSet::total_pulls() const noexcept {
  return std::accumulate(pulls_.begin(), pulls_.end(), std::uint64_t{0});
}

bool ArmSet::is_good(std::size_t i) const {
  if (i >= means_.size()) fail(ErrorCode::kBadIndex, "arm index out of range");
  return means_[i] > 0.5;
}

double ArmSet::good_fraction() const {
  if (means_.empty()) return 0.0;
  std::size_t g = 0;
  for (std::size_t i = 0; i < means_.size(); ++i) g += is_good(i) ? 1 : 0;
  return static_cast<double>(g) / static_cast<double>(means_.size());
}

Label ArmSet::pull(std::size_t i, Rng& rng) {
  if (i >= means_.size()) {
    fail(ErrorCode::kBadIndex, "arm " + std::to_string(i) + " of " +
                                   std::to_string(means_.size()));
  }
  ++pulls_[i];
  std::bernoulli_distribution coin(means_[i]);
  return coin(rng) ? 1 : 0;
}

AgaResult natural_aga(ArmSet& arms, double gamma, double eps, Rng& rng) {
  if (arms.size() == 0) fail(ErrorCode::kInvalidParameter, "no arms");
  if (!(gamma > 0.0 && gamma <= 0.5)) fail(ErrorCode::kInvalidParameter, "gamma outside (0,1/2]");
  AgaResult r;
  r.arms_sampled = chernoff_iterations(eps / 2.0, 1.0 / 6.0);
  r.pulls_per_arm = static_cast<std::size_t>(std::ceil(
      std::log(12.0 * static_cast<double>(r.arms_sampled)) / (2.0 * gamma * gamma) - 1e-9));
  const std::uint64_t before = arms.total_pulls();
  std::uniform_int_distribution<std::size_t> pick(0, arms.size() - 1);
  std::size_t good = 0;
  for (std::size_t j = 0; j < r.arms_sampled; ++j) {
    const std::size_t i = pick(rng);
    std::size_t ones = 0;
    for (std::size_t t = 0; t < r.pulls_per_arm; ++t) ones += arms.pull(i, rng);
    good += 2 * ones > r.pulls_per_arm ? 1 : 0;
  }
  r.estimate = static_cast<double>(good) / static_cast<double>(r.arms_sampled);
  r.pulls_used = arms.total_pulls() - before;
  return r;
}

// ---------------------------------------------------------------------------

namespace {

std::size_t ceil_size(double v) {
  return static_cast<std::size_t>(std::ceil(v - 1e-9));
}

void check_constants(const StarConstants& c) {
  if (!(c.c1 > 0.0 && c.c2 > 0.0 && c.c3 > 0.0)) {
    fail(ErrorCode::kInvalidParameter, "star constants must be positive");
  }
}

std::vector<PointId> draw_pool(std::size_t n, std::size_t ground, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, ground - 1);
  std::vector<PointId> pool(n);
  for (auto& x : pool) x = static_cast<PointId>(pick(rng));
  return pool;
}

void check_ground(std::size_t ground) {
  if (ground > std::numeric_limits<PointId>::max()) {
    fail(ErrorCode::kInvalidParameter, "ground set too large for 32-bit point ids");
  }
}

}  // namespace

StarSizes soft_star_sizes(std::size_t p, double eps, const StarConstants& c) {
  if (p == 0) fail(ErrorCode::kInvalidParameter, "p must be positive");
  if (!(eps > 0.0 && eps < 1.0)) fail(ErrorCode::kInvalidParameter, "eps outside (0,1)");
  check_constants(c);
  StarSizes s;
  const double pd = static_cast<double>(p);
  s.k = ceil_size(c.c1 * pd * pd / (eps * eps));
  s.b = ceil_size(6.0 / eps);
  s.N = ceil_size(c.c2 * static_cast<double>((1 + s.b) * s.k));
  s.m = ceil_size(c.c3 * static_cast<double>(s.N) * static_cast<double>(s.N) /
                  static_cast<double>(1 + s.b));
  return s;
}

StarSizes hard_star_sizes(std::size_t n, std::size_t k, double eps, const StarConstants& c) {
  if (n == 0 || k == 0) fail(ErrorCode::kInvalidParameter, "need arms and k >= 1");
  if (!(eps > 0.0 && eps < 1.0)) fail(ErrorCode::kInvalidParameter, "eps outside (0,1)");
  check_constants(c);
  StarSizes s;
  s.k = k;
  s.b = ceil_size(3.0 / eps);
  const double stars = static_cast<double>((1 + s.b) * n);
  s.N = ceil_size(c.c1 * stars * (static_cast<double>(k) + std::log(1.0 / eps)));
  s.m = ceil_size(c.c2 * static_cast<double>(s.N) * static_cast<double>(s.N) / stars);
  return s;
}

std::vector<double> draw_radii(std::size_t count, Rng& rng) {
  std::uniform_real_distribution<double> u(1.0, 2.0);
  std::set<double> seen;
  std::vector<double> radii;
  radii.reserve(count);
  while (radii.size() < count) {
    const double r = u(rng);
    if (r <= 1.0 || r >= 2.0 || !seen.insert(r).second) continue;  // redraw
    radii.push_back(r);
  }
  return radii;
}

StarInstance build_star_instance_soft(std::size_t p, double eps, double coin_mean,
                                      const StarConstants& constants, std::uint64_t seed,
                                      const StarOptions& options) {
  if (options.enforce_proof_regime && !(eps < 1.0 / (6.0 * std::sqrt(std::exp(1.0))))) {
    fail(ErrorCode::kRegimeViolation, "soft star needs eps < 1/(6 sqrt(e))");
  }
  if (!(coin_mean >= 0.0 && coin_mean <= 1.0)) {
    fail(ErrorCode::kInvalidParameter, "coin mean outside [0,1]");
  }
  const StarSizes s = soft_star_sizes(p, eps, constants);
  Rng rng(seed);
  StarGeometry g;
  g.stars = 1;
  g.centers = s.m;
  g.leaves = s.b * s.m;
  g.radii = draw_radii(s.m, rng);
  check_ground(g.size());

  std::vector<Label> labels(g.size(), 1);
  std::bernoulli_distribution coin(coin_mean);
  for (std::size_t c = 0; c < s.m; ++c) labels[c] = coin(rng) ? 1 : 0;
  const std::size_t ground = g.size();
  std::vector<PointId> pool = draw_pool(s.N, ground, rng);

  StarMeta meta{s.m, s.b, 1, s.k, s.N, constants, seed};
  return {KnnInstance(MetricSpace::star(std::move(g)), std::move(pool), std::move(labels)),
          meta};
}

StarInstance build_star_instance_hard(ArmSet& arms, std::size_t k, double eps,
                                      const StarConstants& constants, std::uint64_t seed,
                                      const StarOptions& options) {
  if (options.enforce_proof_regime && !(eps < 0.25)) {
    fail(ErrorCode::kRegimeViolation, "hard star needs eps < 1/4");
  }
  const std::size_t n = arms.size();
  const StarSizes s = hard_star_sizes(n, k, eps, constants);
  Rng rng(seed);
  StarGeometry g;
  g.stars = n;
  g.centers = s.m;
  g.leaves = s.b * s.m;
  g.radii = draw_radii(n * s.m, rng);
  check_ground(g.size());

  std::vector<Label> labels(g.size(), 0);
  for (std::size_t star = 0; star < n; ++star) {
    const std::size_t base = star * g.star_size();
    for (std::size_t c = 0; c < s.m; ++c) labels[base + c] = arms.pull(star, rng);
  }
  const std::size_t ground = g.size();
  std::vector<PointId> pool = draw_pool(s.N, ground, rng);

  StarMeta meta{s.m, s.b, n, s.k, s.N, constants, seed};
  return {KnnInstance(MetricSpace::star(std::move(g)), std::move(pool), std::move(labels)),
          meta};
}

double star_hard_error(const KnnInstance& inst, std::size_t k) {
  if (inst.space().kind() != MetricSpace::Kind::kStar) {
    fail(ErrorCode::kTruthUnavailable, "not a star instance");
  }
  if (k == 0 || k > inst.pool_size()) fail(ErrorCode::kInvalidK, "k outside [1, N]");
  const StarGeometry& g = inst.space().geometry();
  const auto& pool = inst.pool();
  const std::size_t ground = g.size();

  std::vector<bool> in_pool(ground, false);
  for (PointId x : pool) in_pool[x] = true;

  // Majority over the first k of: own-star list, then every other pool
  // point in pool order (all at the cross distance).
  auto majority = [&](const std::vector<std::uint32_t>& own, std::size_t star) -> Label {
    std::size_t taken = 0, ones = 0;
    for (std::uint32_t i : own) {
      if (taken == k) break;
      ones += inst.label(pool[i]);
      ++taken;
    }
    for (std::uint32_t i = 0; taken < k && i < pool.size(); ++i) {
      if (g.star_of(pool[i]) == star) continue;
      ones += inst.label(pool[i]);
      ++taken;
    }
    return 2 * ones > k ? 1 : 0;
  };

  std::vector<Label> leaf_pred(g.stars), center_pred(g.stars);
  for (std::size_t star = 0; star < g.stars; ++star) {
    std::vector<std::uint32_t> centers, leaves;
    for (std::uint32_t i = 0; i < pool.size(); ++i) {
      if (g.star_of(pool[i]) != star) continue;
      (g.is_center(pool[i]) ? centers : leaves).push_back(i);
    }
    // From a leaf: centers by radius, then leaves at 2.
    std::vector<std::uint32_t> from_leaf = centers;
    std::stable_sort(from_leaf.begin(), from_leaf.end(), [&](std::uint32_t a, std::uint32_t b) {
      return g.radii[g.center_index(pool[a])] < g.radii[g.center_index(pool[b])];
    });
    from_leaf.insert(from_leaf.end(), leaves.begin(), leaves.end());
    leaf_pred[star] = majority(from_leaf, star);
    // From a center outside the pool: centers at 1, then leaves at its radius.
    std::vector<std::uint32_t> from_center = centers;
    from_center.insert(from_center.end(), leaves.begin(), leaves.end());
    center_pred[star] = majority(from_center, star);
  }

  std::size_t wrong = 0;
  std::vector<std::uint32_t> scratch;
  for (std::size_t x = 0; x < ground; ++x) {
    const auto px = static_cast<PointId>(x);
    Label pred;
    if (in_pool[x]) {
      std::size_t ones = 0;
      for (std::uint32_t i : inst.nearest(px, k, scratch)) ones += inst.label(pool[i]);
      pred = 2 * ones > k ? 1 : 0;
    } else {
      pred = g.is_center(px) ? center_pred[g.star_of(px)] : leaf_pred[g.star_of(px)];
    }
    wrong += pred != inst.label(px) ? 1 : 0;
  }
  return static_cast<double>(wrong) / static_cast<double>(ground);
}

}  // namespace activetest
