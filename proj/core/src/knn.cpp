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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace activetest {

double StarGeometry::distance(PointId a, PointId b) const noexcept {
  if (a == b) return 0.0;
  if (star_of(a) != star_of(b)) return cross;
  const bool ca = is_center(a);
  const bool cb = is_center(b);
  if (ca && cb) return 1.0;
  if (!ca && !cb) return 2.0;
  return radii[center_index(ca ? a : b)];
}

MetricSpace MetricSpace::euclidean1d(std::vector<double> coords) {
  MetricSpace s;
  s.kind_ = Kind::kEuclidean1d;
  s.size_ = coords.size();
  s.coords_ = std::move(coords);
  return s;
}

MetricSpace MetricSpace::explicit_matrix(std::vector<std::vector<double>> distances) {
  const std::size_t n = distances.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (distances[i].size() != n) fail(ErrorCode::kFormat, "distance matrix is not square");
    if (distances[i][i] != 0.0) fail(ErrorCode::kFormat, "distance matrix diagonal must be 0");
    for (std::size_t j = 0; j < i; ++j) {
      if (!(distances[i][j] >= 0.0) || distances[i][j] != distances[j][i]) {
        fail(ErrorCode::kFormat, "distance matrix must be symmetric and nonnegative");
      }
    }
  }
  MetricSpace s;
  s.kind_ = Kind::kExplicit;
  s.size_ = n;
  s.matrix_ = std::move(distances);
  return s;
}

MetricSpace MetricSpace::star(StarGeometry geometry) {
  if (geometry.stars == 0 || geometry.centers == 0) {
    fail(ErrorCode::kInvalidParameter, "star needs centers");
  }
  if (geometry.radii.size() != geometry.stars * geometry.centers) {
    fail(ErrorCode::kFormat, "one radius per center expected");
  }
  MetricSpace s;
  s.kind_ = Kind::kStar;
  s.size_ = geometry.size();
  s.star_ = std::move(geometry);
  return s;
}

MetricSpace MetricSpace::custom(std::size_t n,
                                std::function<double(PointId, PointId)> dist) {
  if (!dist) fail(ErrorCode::kInvalidParameter, "custom metric needs a function");
  MetricSpace s;
  s.kind_ = Kind::kCustom;
  s.size_ = n;
  s.custom_ = std::move(dist);
  return s;
}

double MetricSpace::distance(PointId a, PointId b) const {
  switch (kind_) {
    case Kind::kEuclidean1d:
      return std::abs(coords_[a] - coords_[b]);
    case Kind::kExplicit:
      return matrix_[a][b];
    case Kind::kStar:
      return star_.distance(a, b);
    case Kind::kCustom:
      return custom_(a, b);
  }
  return 0.0;
}

// ---------------------------------------------------------------------------

KnnInstance::KnnInstance(MetricSpace space, std::vector<PointId> pool,
                         std::vector<Label> labels)
    : space_(std::move(space)), pool_(std::move(pool)), labels_(std::move(labels)) {
  if (pool_.empty()) fail(ErrorCode::kInvalidParameter, "empty pool");
  if (labels_.size() != space_.size()) {
    fail(ErrorCode::kDomainMismatch, "one label per ground point expected");
  }
  for (PointId x : pool_) {
    if (x >= space_.size()) fail(ErrorCode::kBadIndex, "pool id outside ground set");
  }
  for (Label l : labels_) {
    if (l > 1) fail(ErrorCode::kFormat, "labels must be 0 or 1");
  }
}

void KnnInstance::rank_into(PointId x, std::size_t k,
                            std::vector<std::uint32_t>& out) const {
  const std::size_t n = pool_.size();
  std::vector<std::pair<double, std::uint32_t>> keyed(n);
  for (std::size_t i = 0; i < n; ++i) {
    keyed[i] = {space_.distance(x, pool_[i]), static_cast<std::uint32_t>(i)};
  }
  if (k < n) {
    std::partial_sort(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(k),
                      keyed.end());
  } else {
    std::sort(keyed.begin(), keyed.end());
    k = n;
  }
  out.resize(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = keyed[i].second;
}

std::span<const std::uint32_t> KnnInstance::nearest(
    PointId x, std::size_t k, std::vector<std::uint32_t>& scratch) const {
  if (k == 0 || k > pool_.size()) {
    fail(ErrorCode::kInvalidK, "k=" + std::to_string(k) + " outside [1, " +
                                   std::to_string(pool_.size()) + "]");
  }
  if (x >= space_.size()) fail(ErrorCode::kBadIndex, "point outside ground set");
  if (!cache_.empty()) {
    return {cache_.data() + static_cast<std::size_t>(x) * pool_.size(), k};
  }
  rank_into(x, k, scratch);
  return scratch;
}

std::vector<std::uint32_t> KnnInstance::ranking(PointId x) const {
  std::vector<std::uint32_t> out;
  auto s = nearest(x, pool_.size(), out);
  return {s.begin(), s.end()};
}

bool KnnInstance::precompute_rankings(std::size_t max_entries) {
  const std::size_t n = pool_.size();
  const std::size_t g = space_.size();
  if (g != 0 && n > max_entries / g) return false;
  std::vector<std::uint32_t> cache(g * n);
  std::vector<std::uint32_t> row;
  for (std::size_t x = 0; x < g; ++x) {
    rank_into(static_cast<PointId>(x), n, row);
    std::copy(row.begin(), row.end(), cache.begin() + static_cast<std::ptrdiff_t>(x * n));
  }
  cache_ = std::move(cache);
  return true;
}

PointOracle KnnInstance::make_oracle(std::optional<std::uint64_t> budget) const {
  const std::vector<Label>* labels = &labels_;
  return PointOracle([labels](const PointId& x) { return (*labels)[x]; }, budget);
}

// ---------------------------------------------------------------------------

namespace {

std::size_t positives(const KnnInstance& inst, std::span<const std::uint32_t> nbrs) {
  std::size_t s = 0;
  for (std::uint32_t i : nbrs) s += inst.label(inst.pool()[i]);
  return s;
}

double ipow(double x, std::size_t p) {
  double r = 1.0;
  for (std::size_t i = 0; i < p; ++i) r *= x;
  return r;
}

void check_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) fail(ErrorCode::kInvalidParameter, "eps outside (0,1)");
}

void check_k(const KnnInstance& inst, std::size_t k) {
  if (k == 0 || k > inst.pool_size()) {
    fail(ErrorCode::kInvalidK, "k=" + std::to_string(k) + " outside [1, " +
                                   std::to_string(inst.pool_size()) + "]");
  }
}

void check_test_dist(const KnnInstance& inst, const IndexDistribution& d) {
  if (d.size() != inst.ground_size()) {
    fail(ErrorCode::kDomainMismatch, "test distribution is not over the ground set");
  }
}

}  // namespace

double knn_predict_soft(const KnnInstance& inst, PointId x, std::size_t k) {
  check_k(inst, k);
  std::vector<std::uint32_t> scratch;
  const auto nbrs = inst.nearest(x, k, scratch);
  return static_cast<double>(positives(inst, nbrs)) / static_cast<double>(k);
}

Label knn_predict_hard(const KnnInstance& inst, PointId x, std::size_t k) {
  check_k(inst, k);
  std::vector<std::uint32_t> scratch;
  const auto nbrs = inst.nearest(x, k, scratch);
  // mean > 1/2 without rounding
  return 2 * positives(inst, nbrs) > k ? 1 : 0;
}

LossEstimate estimate_soft_loss_pth(const KnnInstance& inst, PointOracle& oracle,
                                    const IndexDistribution& test_dist, std::size_t k,
                                    std::size_t p, double eps, Rng& rng) {
  check_eps(eps);
  check_k(inst, k);
  check_test_dist(inst, test_dist);
  if (p == 0) fail(ErrorCode::kInvalidParameter, "p must be positive");
  LossEstimate est;
  est.iterations = chernoff_iterations(eps, 1.0 / 3.0);
  const std::uint64_t before = oracle.used();
  std::uniform_int_distribution<std::size_t> pick(0, k - 1);
  std::vector<std::uint32_t> scratch;
  double sum = 0.0;
  for (std::size_t it = 0; it < est.iterations; ++it) {
    const auto x = static_cast<PointId>(test_dist.sample(rng));
    const Label fx = oracle.query(x);
    const auto nbrs = inst.nearest(x, k, scratch);
    int prod = 1;
    for (std::size_t j = 0; j < p; ++j) {
      const Label y = oracle.query(inst.pool()[nbrs[pick(rng)]]);
      prod &= (y != fx) ? 1 : 0;
    }
    sum += prod;
  }
  est.value = sum / static_cast<double>(est.iterations);
  est.queries_used = oracle.used() - before;
  return est;
}

std::size_t lipschitz_draws(double lipschitz, double eps, std::size_t rounds) {
  check_eps(eps);
  if (!(lipschitz > 0.0) || rounds == 0) {
    fail(ErrorCode::kInvalidParameter, "need L > 0 and at least one round");
  }
  const double raw = 2.0 * lipschitz * lipschitz *
                     std::log(12.0 * static_cast<double>(rounds)) / (eps * eps);
  return static_cast<std::size_t>(std::ceil(raw - 1e-9));
}

LossEstimate estimate_loss_lipschitz(const KnnInstance& inst, PointOracle& oracle,
                                     const IndexDistribution& test_dist, std::size_t k,
                                     const LipschitzLoss& loss, double eps, Rng& rng) {
  check_eps(eps);
  check_k(inst, k);
  check_test_dist(inst, test_dist);
  if (!loss.fn) fail(ErrorCode::kInvalidParameter, "missing loss function");
  LossEstimate est;
  est.iterations = chernoff_iterations(eps / 2.0, 1.0 / 6.0);
  const std::size_t w = lipschitz_draws(loss.lipschitz, eps, est.iterations);
  const std::uint64_t before = oracle.used();
  std::uniform_int_distribution<std::size_t> pick(0, k - 1);
  std::vector<std::uint32_t> scratch;
  double sum = 0.0;
  for (std::size_t it = 0; it < est.iterations; ++it) {
    const auto x = static_cast<PointId>(test_dist.sample(rng));
    const Label fx = oracle.query(x);
    const auto nbrs = inst.nearest(x, k, scratch);
    std::size_t ones = 0;
    for (std::size_t j = 0; j < w; ++j) ones += oracle.query(inst.pool()[nbrs[pick(rng)]]);
    const double mean = static_cast<double>(ones) / static_cast<double>(w);
    sum += loss.fn(std::abs(mean - static_cast<double>(fx)));
  }
  est.value = sum / static_cast<double>(est.iterations);
  est.queries_used = oracle.used() - before;
  return est;
}

namespace {

std::vector<double> pool_weights(const KnnInstance& inst, const NeighborWeights& weights,
                                 PointId x, std::span<const std::uint32_t> order) {
  std::vector<double> w(inst.pool_size(), 0.0);
  for (std::size_t r = 0; r < order.size(); ++r) {
    const std::uint32_t i = order[r];
    const double v = weights(inst.space().distance(x, inst.pool()[i]), r);
    if (!(v >= 0.0) || !std::isfinite(v)) {
      fail(ErrorCode::kDegenerateWeights, "neighbour weights must be finite and >= 0");
    }
    w[i] = v;
  }
  double total = 0.0;
  for (double v : w) total += v;
  if (!(total > 0.0)) {
    fail(ErrorCode::kDegenerateWeights,
         "all neighbour weights vanish at point " + std::to_string(x));
  }
  return w;
}

}  // namespace

LossEstimate estimate_weighted_nn_loss(const KnnInstance& inst, PointOracle& oracle,
                                       const NeighborWeights& weights,
                                       const IndexDistribution& test_dist, std::size_t p,
                                       double eps, Rng& rng) {
  check_eps(eps);
  check_test_dist(inst, test_dist);
  if (!weights) fail(ErrorCode::kInvalidParameter, "missing weight function");
  if (p == 0) fail(ErrorCode::kInvalidParameter, "p must be positive");
  LossEstimate est;
  est.iterations = chernoff_iterations(eps, 1.0 / 3.0);
  const std::uint64_t before = oracle.used();
  std::vector<std::uint32_t> scratch;
  double sum = 0.0;
  for (std::size_t it = 0; it < est.iterations; ++it) {
    const auto x = static_cast<PointId>(test_dist.sample(rng));
    const Label fx = oracle.query(x);
    const auto order = inst.nearest(x, inst.pool_size(), scratch);
    const IndexDistribution pick(pool_weights(inst, weights, x, order));
    int prod = 1;
    for (std::size_t j = 0; j < p; ++j) {
      prod &= oracle.query(inst.pool()[pick.sample(rng)]) != fx ? 1 : 0;
    }
    sum += prod;
  }
  est.value = sum / static_cast<double>(est.iterations);
  est.queries_used = oracle.used() - before;
  return est;
}

LossEstimate estimate_hard_error(const KnnInstance& inst, PointOracle& oracle,
                                 const IndexDistribution& test_dist, std::size_t k,
                                 double eps, Rng& rng) {
  check_eps(eps);
  check_k(inst, k);
  check_test_dist(inst, test_dist);
  LossEstimate est;
  est.iterations = chernoff_iterations(eps, 1.0 / 3.0);
  const std::uint64_t before = oracle.used();
  std::vector<std::uint32_t> scratch;
  std::size_t wrong = 0;
  for (std::size_t it = 0; it < est.iterations; ++it) {
    const auto x = static_cast<PointId>(test_dist.sample(rng));
    const Label fx = oracle.query(x);
    const auto nbrs = inst.nearest(x, k, scratch);
    std::size_t ones = 0;
    for (std::uint32_t i : nbrs) ones += oracle.query(inst.pool()[i]);
    const Label pred = 2 * ones > k ? 1 : 0;
    wrong += pred != fx ? 1 : 0;
  }
  est.value = static_cast<double>(wrong) / static_cast<double>(est.iterations);
  est.queries_used = oracle.used() - before;
  return est;
}

BestKGrid best_k_grid(std::size_t n, std::size_t p, double eps) {
  if (n == 0) fail(ErrorCode::kInvalidParameter, "empty pool");
  if (p == 0) fail(ErrorCode::kInvalidParameter, "p must be positive");
  check_eps(eps);
  BestKGrid g;
  const double pd = static_cast<double>(p);
  g.ratio = pd / (pd - eps / 3.0);
  g.t = static_cast<std::size_t>(
      std::floor(std::log(static_cast<double>(n)) / std::log(g.ratio) + 1e-9));
  for (std::size_t i = 0; i <= g.t; ++i) {
    const double v = std::pow(g.ratio, static_cast<double>(i));
    for (double c : {std::floor(v + 1e-9), std::ceil(v - 1e-9)}) {
      g.ks.push_back(std::clamp<std::size_t>(static_cast<std::size_t>(c), 1, n));
    }
  }
  std::sort(g.ks.begin(), g.ks.end());
  g.ks.erase(std::unique(g.ks.begin(), g.ks.end()), g.ks.end());
  return g;
}

BestKResult best_k(const KnnInstance& inst, PointOracle& oracle,
                   const IndexDistribution& test_dist, std::size_t p, double eps,
                   Rng& rng) {
  if (!(eps > 0.0 && eps < 0.5)) fail(ErrorCode::kInvalidParameter, "best_k needs 0<eps<1/2");
  BestKResult res;
  res.grid = best_k_grid(inst.pool_size(), p, eps);
  res.repetitions =
      median_repetitions(1.0 / (3.0 * static_cast<double>(res.grid.ks.size())));
  const std::uint64_t before = oracle.used();
  double best = 2.0;
  for (std::size_t k : res.grid.ks) {
    std::vector<double> runs(res.repetitions);
    for (auto& r : runs) {
      r = estimate_soft_loss_pth(inst, oracle, test_dist, k, p, eps / 3.0, rng).value;
    }
    const double est = median(std::move(runs));
    res.table.emplace_back(k, est);
    if (est < best) {
      best = est;
      res.k_star = k;
    }
  }
  res.queries_used = oracle.used() - before;
  return res;
}

// ---------------------------------------------------------------------------

std::vector<double> exact_soft_loss_table(const KnnInstance& inst,
                                          const IndexDistribution& test_dist,
                                          std::size_t p) {
  check_test_dist(inst, test_dist);
  if (p == 0) fail(ErrorCode::kInvalidParameter, "p must be positive");
  const std::size_t n = inst.pool_size();
  std::vector<double> loss(n, 0.0);
  std::vector<std::uint32_t> scratch;
  for (std::size_t x = 0; x < inst.ground_size(); ++x) {
    const double pi = test_dist.probability(x);
    if (pi == 0.0) continue;
    const auto px = static_cast<PointId>(x);
    const Label fx = inst.label(px);
    const auto order = inst.nearest(px, n, scratch);
    std::size_t miss = 0;
    for (std::size_t k = 1; k <= n; ++k) {
      miss += inst.label(inst.pool()[order[k - 1]]) != fx ? 1 : 0;
      loss[k - 1] += pi * ipow(static_cast<double>(miss) / static_cast<double>(k), p);
    }
  }
  return loss;
}

double exact_soft_loss(const KnnInstance& inst, const IndexDistribution& test_dist,
                       std::size_t k, std::size_t p) {
  check_k(inst, k);
  return exact_soft_loss_table(inst, test_dist, p)[k - 1];
}

double exact_hard_error(const KnnInstance& inst, const IndexDistribution& test_dist,
                        std::size_t k) {
  check_k(inst, k);
  check_test_dist(inst, test_dist);
  std::vector<std::uint32_t> scratch;
  double err = 0.0;
  for (std::size_t x = 0; x < inst.ground_size(); ++x) {
    const double pi = test_dist.probability(x);
    if (pi == 0.0) continue;
    const auto px = static_cast<PointId>(x);
    const auto nbrs = inst.nearest(px, k, scratch);
    const Label pred = 2 * positives(inst, nbrs) > k ? 1 : 0;
    if (pred != inst.label(px)) err += pi;
  }
  return err;
}

double exact_weighted_loss(const KnnInstance& inst, const NeighborWeights& weights,
                           const IndexDistribution& test_dist, std::size_t p) {
  check_test_dist(inst, test_dist);
  if (p == 0) fail(ErrorCode::kInvalidParameter, "p must be positive");
  std::vector<std::uint32_t> scratch;
  double loss = 0.0;
  for (std::size_t x = 0; x < inst.ground_size(); ++x) {
    const double pi = test_dist.probability(x);
    if (pi == 0.0) continue;
    const auto px = static_cast<PointId>(x);
    const Label fx = inst.label(px);
    const auto order = inst.nearest(px, inst.pool_size(), scratch);
    const auto w = pool_weights(inst, weights, px, order);
    double total = 0.0;
    double miss = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      total += w[i];
      if (inst.label(inst.pool()[i]) != fx) miss += w[i];
    }
    loss += pi * ipow(miss / total, p);
  }
  return loss;
}

}  // namespace activetest
