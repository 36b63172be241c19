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

// k-nearest-neighbour predictors over a finite metric space and the
// label-efficient estimators of their loss: the p-fold product estimator,
// the Lipschitz-loss estimator, weighted NN, the hard (majority) estimator
// and the geometric best-k search. Exact enumerators used as ground truth
// live at the bottom.

#ifndef ACTIVETEST_KNN_HPP_
#define ACTIVETEST_KNN_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "activetest/core.hpp"

namespace activetest {

/// n stars of `centers` centers and `leaves` leaves each. Ids are laid out
/// star by star, centers first. Center c sits at radii[c] in (1,2) from every
/// leaf of its star; centers are 1 apart, leaves 2 apart, stars `cross` apart.
struct StarGeometry {
  std::size_t stars = 1;
  std::size_t centers = 0;
  std::size_t leaves = 0;
  std::vector<double> radii;  // stars * centers
  double cross = 10.0;

  std::size_t star_size() const noexcept { return centers + leaves; }
  std::size_t size() const noexcept { return stars * star_size(); }
  std::size_t star_of(PointId x) const noexcept { return x / star_size(); }
  bool is_center(PointId x) const noexcept { return x % star_size() < centers; }
  /// Index into radii for a center id.
  std::size_t center_index(PointId x) const noexcept {
    return star_of(x) * centers + x % star_size();
  }
  double distance(PointId a, PointId b) const noexcept;
};

class MetricSpace {
 public:
  enum class Kind { kEuclidean1d, kExplicit, kStar, kCustom };

  static MetricSpace euclidean1d(std::vector<double> coords);
  /// Full symmetric matrix with zero diagonal; validated.
  static MetricSpace explicit_matrix(std::vector<std::vector<double>> distances);
  static MetricSpace star(StarGeometry geometry);
  static MetricSpace custom(std::size_t n, std::function<double(PointId, PointId)> dist);

  Kind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return size_; }
  double distance(PointId a, PointId b) const;

  const std::vector<double>& coords() const noexcept { return coords_; }
  const std::vector<std::vector<double>>& matrix() const noexcept { return matrix_; }
  const StarGeometry& geometry() const noexcept { return star_; }

 private:
  Kind kind_ = Kind::kEuclidean1d;
  std::size_t size_ = 0;
  std::vector<double> coords_;
  std::vector<std::vector<double>> matrix_;
  StarGeometry star_;
  std::function<double(PointId, PointId)> custom_;
};

/// Ground set, unlabeled pool S (ids, duplicates allowed) and the hidden
/// labels. Neighbour order is (distance, pool position), the same for every
/// k, so the k-nearest set is a prefix of the (k+1)-nearest one.
class KnnInstance {
 public:
  KnnInstance(MetricSpace space, std::vector<PointId> pool, std::vector<Label> labels);

  const MetricSpace& space() const noexcept { return space_; }
  std::size_t ground_size() const noexcept { return space_.size(); }
  std::size_t pool_size() const noexcept { return pool_.size(); }
  const std::vector<PointId>& pool() const noexcept { return pool_; }
  const std::vector<Label>& labels() const noexcept { return labels_; }
  Label label(PointId x) const { return labels_.at(x); }

  /// Pool positions of the k nearest pool points to x, nearest first.
  /// `scratch` backs the span when no cached ranking exists.
  std::span<const std::uint32_t> nearest(PointId x, std::size_t k,
                                         std::vector<std::uint32_t>& scratch) const;
  std::vector<std::uint32_t> ranking(PointId x) const;

  /// Stores the full ranking of every ground point when ground*pool stays
  /// under `max_entries`. Returns whether the cache was built.
  bool precompute_rankings(std::size_t max_entries = std::size_t{1} << 26);
  bool has_ranking_cache() const noexcept { return !cache_.empty(); }

  /// Fresh oracle over the hidden labels.
  PointOracle make_oracle(std::optional<std::uint64_t> budget = std::nullopt) const;

 private:
  void rank_into(PointId x, std::size_t k, std::vector<std::uint32_t>& out) const;

  MetricSpace space_;
  std::vector<PointId> pool_;
  std::vector<Label> labels_;
  std::vector<std::uint32_t> cache_;  // ground_size * pool_size
};

// ---------------------------------------------------------------------------
// Predictors (read labels of the pool directly; no oracle accounting).

double knn_predict_soft(const KnnInstance& inst, PointId x, std::size_t k);
/// 1 iff the k-neighbour mean is strictly above 1/2.
Label knn_predict_hard(const KnnInstance& inst, PointId x, std::size_t k);

// ---------------------------------------------------------------------------
// Estimators. Every label (test point and neighbours) goes through `oracle`.

struct LossEstimate {
  double value = 0.0;
  std::uint64_t queries_used = 0;
  std::size_t iterations = 0;
};

/// Unbiased estimate of E_x[err1(x)^p] from T = chernoff(eps, 1/3) rounds
/// of one test label and p neighbour labels; T (p+1) queries.
LossEstimate estimate_soft_loss_pth(const KnnInstance& inst, PointOracle& oracle,
                                    const IndexDistribution& test_dist, std::size_t k,
                                    std::size_t p, double eps, Rng& rng);

struct LipschitzLoss {
  std::function<double(double)> fn;  // [0,1] -> [0,1]
  double lipschitz = 1.0;
};

/// ceil(2 L^2 ln(12 T) / eps^2)
std::size_t lipschitz_draws(double lipschitz, double eps, std::size_t rounds);

LossEstimate estimate_loss_lipschitz(const KnnInstance& inst, PointOracle& oracle,
                                     const IndexDistribution& test_dist, std::size_t k,
                                     const LipschitzLoss& loss, double eps, Rng& rng);

/// Weight of a pool point given its distance to the test point and its
/// position in the neighbour order (0 = nearest).
using NeighborWeights = std::function<double(double distance, std::size_t rank)>;

LossEstimate estimate_weighted_nn_loss(const KnnInstance& inst, PointOracle& oracle,
                                       const NeighborWeights& weights,
                                       const IndexDistribution& test_dist, std::size_t p,
                                       double eps, Rng& rng);

/// T = chernoff(eps, 1/3) rounds of a test label plus all k neighbour labels.
LossEstimate estimate_hard_error(const KnnInstance& inst, PointOracle& oracle,
                                 const IndexDistribution& test_dist, std::size_t k,
                                 double eps, Rng& rng);

struct BestKGrid {
  double ratio = 1.0;        // r = p / (p - eps/3)
  std::size_t t = 0;         // floor(log_r N)
  std::vector<std::size_t> ks;  // deduplicated, ascending, within [1, N]
};

BestKGrid best_k_grid(std::size_t n, std::size_t p, double eps);

struct BestKResult {
  std::size_t k_star = 1;
  std::vector<std::pair<std::size_t, double>> table;
  BestKGrid grid;
  std::size_t repetitions = 0;
  std::uint64_t queries_used = 0;
};

/// Estimates every grid k at eps/3 (median of repetitions) and returns the
/// smallest estimate.
BestKResult best_k(const KnnInstance& inst, PointOracle& oracle,
                   const IndexDistribution& test_dist, std::size_t p, double eps,
                   Rng& rng);

// ---------------------------------------------------------------------------
// Exact enumeration over the whole ground set under test_dist.

/// loss[k-1] = E_x[err1_k(x)^p] for k = 1..N.
std::vector<double> exact_soft_loss_table(const KnnInstance& inst,
                                          const IndexDistribution& test_dist,
                                          std::size_t p);
double exact_soft_loss(const KnnInstance& inst, const IndexDistribution& test_dist,
                       std::size_t k, std::size_t p);
double exact_hard_error(const KnnInstance& inst, const IndexDistribution& test_dist,
                        std::size_t k);
double exact_weighted_loss(const KnnInstance& inst, const NeighborWeights& weights,
                           const IndexDistribution& test_dist, std::size_t p);

}  // namespace activetest

#endif  // ACTIVETEST_KNN_HPP_
