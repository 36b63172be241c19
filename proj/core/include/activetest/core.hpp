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

// Shared vocabulary for the active-testing algorithms: labels, target
// functions, budgeted label oracles, active pools, weighted samples,
// seeded distributions and the concentration-bound helpers every estimator
// uses to size its loops.

#ifndef ACTIVETEST_CORE_HPP_
#define ACTIVETEST_CORE_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace activetest {

using Label = std::uint8_t;
using PointId = std::uint32_t;
using Rng = std::mt19937_64;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

enum class ErrorCode {
  kInvalidParameter,
  kInvalidClassParameter,
  kBudgetExceeded,
  kDomainMismatch,
  kInfiniteDivergence,
  kRegimeViolation,
  kInsufficientPool,
  kPartitionViolation,
  kInvalidK,
  kDegenerateWeights,
  kBadIndex,
  kUnknownAlgorithm,
  kTruthUnavailable,
  kFormat,
};

/// Short phrase used as the message prefix for each error code.
std::string_view error_phrase(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string_view detail);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, std::string_view detail = {});

// ---------------------------------------------------------------------------
// Seeds
// ---------------------------------------------------------------------------

/// splitmix64 finalizer; used to derive independent per-trial/per-stream
/// seeds from one 64-bit master seed.
std::uint64_t mix_seed(std::uint64_t x) noexcept;
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept;

// ---------------------------------------------------------------------------
// Target functions and oracles
// ---------------------------------------------------------------------------

template <typename Point>
using TargetFunction = std::function<Label(const Point&)>;

/// Answers label queries against a hidden target and counts every query.
/// The counter is the single source of truth for query complexity; a query
/// past the budget throws kBudgetExceeded and is not counted.
template <typename Point>
class LabelOracle {
 public:
  explicit LabelOracle(TargetFunction<Point> target,
                       std::optional<std::uint64_t> budget = std::nullopt)
      : target_(std::move(target)), budget_(budget) {}

  Label query(const Point& x) {
    if (budget_ && used_ >= *budget_) {
      fail(ErrorCode::kBudgetExceeded,
           "oracle budget of " + std::to_string(*budget_) + " queries spent");
    }
    ++used_;
    return target_(x);
  }

  std::uint64_t used() const noexcept { return used_; }
  std::optional<std::uint64_t> budget() const noexcept { return budget_; }
  std::optional<std::uint64_t> remaining() const noexcept {
    if (!budget_) return std::nullopt;
    return *budget_ - used_;
  }

 private:
  TargetFunction<Point> target_;
  std::optional<std::uint64_t> budget_;
  std::uint64_t used_ = 0;
};

using LineOracle = LabelOracle<double>;
using PointOracle = LabelOracle<PointId>;

/// Unlabeled points drawn up front; labels may only be requested by index
/// into `points`, which is the active-access restriction.
template <typename Point>
class ActivePool {
 public:
  ActivePool(std::vector<Point> points, LabelOracle<Point> oracle)
      : points_(std::move(points)), oracle_(std::move(oracle)) {}

  std::size_t size() const noexcept { return points_.size(); }
  const Point& point(std::size_t i) const {
    check_index(i);
    return points_[i];
  }
  std::span<const Point> points() const noexcept { return points_; }

  Label query(std::size_t i) {
    check_index(i);
    return oracle_.query(points_[i]);
  }

  std::uint64_t queries_used() const noexcept { return oracle_.used(); }
  const LabelOracle<Point>& oracle() const noexcept { return oracle_; }

 private:
  void check_index(std::size_t i) const {
    if (i >= points_.size()) {
      fail(ErrorCode::kBadIndex, "pool index " + std::to_string(i) +
                                     " out of range " +
                                     std::to_string(points_.size()));
    }
  }

  std::vector<Point> points_;
  LabelOracle<Point> oracle_;
};

using LinePool = ActivePool<double>;

/// A subset of a pool addressed by local indices; queries are forwarded to
/// (and counted by) the parent pool.
template <typename Point>
class PoolSlice {
 public:
  PoolSlice(ActivePool<Point>& parent, std::span<const std::size_t> indices)
      : parent_(&parent), indices_(indices) {}

  std::size_t size() const noexcept { return indices_.size(); }
  const Point& point(std::size_t i) const { return parent_->point(index(i)); }
  Label query(std::size_t i) { return parent_->query(index(i)); }

 private:
  std::size_t index(std::size_t i) const {
    if (i >= indices_.size()) fail(ErrorCode::kBadIndex, "slice index out of range");
    return indices_[i];
  }

  ActivePool<Point>* parent_;
  std::span<const std::size_t> indices_;
};

using LineSlice = PoolSlice<double>;

// ---------------------------------------------------------------------------
// Weighted samples
// ---------------------------------------------------------------------------

struct SampleEntry {
  double point = 0.0;
  double weight = 0.0;
  std::optional<Label> label;
};

/// Finite list of (point, weight, optional label) atoms. Duplicated points are
/// kept as distinct atoms.
class WeightedSample {
 public:
  WeightedSample() = default;
  explicit WeightedSample(std::vector<SampleEntry> entries);

  /// Uniform weights 1/n over `points`, labeled when `labels` is non-empty.
  static WeightedSample uniform(std::span<const double> points,
                                std::span<const Label> labels = {});

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const SampleEntry& operator[](std::size_t i) const { return entries_[i]; }
  std::span<const SampleEntry> entries() const noexcept { return entries_; }

  void add(double point, double weight, std::optional<Label> label = {});

  double total_weight() const noexcept;
  bool is_normalized(double tol = 1e-9) const noexcept;
  bool fully_labeled() const noexcept;

 private:
  std::vector<SampleEntry> entries_;
};

/// Total weight of entries whose labels differ. Both samples must list the
/// same points with the same weights and carry a label on every entry.
double empirical_distance(const WeightedSample& a, const WeightedSample& b);

// ---------------------------------------------------------------------------
// Distributions
// ---------------------------------------------------------------------------

/// Sampling over indices {0..n-1} by cumulative weights. const and
/// deterministic for a given generator state.
class IndexDistribution {
 public:
  IndexDistribution() = default;
  explicit IndexDistribution(std::span<const double> weights);
  static IndexDistribution uniform(std::size_t n);

  std::size_t size() const noexcept { return size_; }
  double probability(std::size_t i) const;
  std::size_t sample(Rng& rng) const;

 private:
  std::size_t size_ = 0;
  std::vector<double> cumulative_;  // empty means uniform
  double total_ = 0.0;
};

/// Seeded generator of real-valued points.
class Distribution {
 public:
  enum class Kind { kUniform01, kFiniteWeighted, kCustomCdf };

  static Distribution uniform01();
  static Distribution finite(std::vector<double> atoms,
                             std::vector<double> weights);
  /// Samples `inverse_cdf(U)` for U ~ uniform(0,1).
  static Distribution from_inverse_cdf(std::function<double(double)> inverse_cdf);

  Kind kind() const noexcept { return kind_; }
  double sample(Rng& rng) const;
  std::vector<double> sample_n(std::size_t n, Rng& rng) const;

  /// Atoms and weights of a finite-weighted distribution.
  std::span<const double> atoms() const noexcept { return atoms_; }
  const IndexDistribution& atom_weights() const noexcept { return weights_; }

 private:
  Kind kind_ = Kind::kUniform01;
  std::vector<double> atoms_;
  IndexDistribution weights_;
  std::function<double(double)> inverse_cdf_;
};

// ---------------------------------------------------------------------------
// Statistics helpers
// ---------------------------------------------------------------------------

/// Relative entropy D(x||y) between Bernoulli(x) and Bernoulli(y), in nats,
/// with 0 log 0 = 0.
double relative_entropy(double x, double y);

/// Hoeffding count ceil(ln(2/delta) / (2 eps^2)): averaging that many
/// independent [0,1] values lands within eps of the mean w.p. >= 1 - delta.
std::size_t chernoff_iterations(double eps, double delta);

/// Repetitions for median boosting to failure probability delta:
/// ceil(18 ln(1/delta)), rounded up to an odd count.
std::size_t median_repetitions(double delta);

/// Median of a non-empty list (lower median for even sizes).
double median(std::vector<double> values);

}  // namespace activetest

#endif  // ACTIVETEST_CORE_HPP_
