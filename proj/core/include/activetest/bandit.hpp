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

// Bernoulli arms, the natural good-arm fraction estimator, and the star
// k-NN instances that encode coin distinguishing (soft loss) and good-arm
// approximation (hard error).

#ifndef ACTIVETEST_BANDIT_HPP_
#define ACTIVETEST_BANDIT_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "activetest/core.hpp"
#include "activetest/knn.hpp"

namespace activetest {

class ArmSet {
 public:
  /// Means in [0,1]. With gamma > 0 every mean must be >= 1/2 + gamma or
  /// <= 1/2 - gamma; gamma = 0 skips the gap check.
  explicit ArmSet(std::vector<double> means, double gamma = 0.0);

  std::size_t size() const noexcept { return means_.size(); }
  double gamma() const noexcept { return gamma_; }
  const std::vector<double>& means() const noexcept { return means_; }
  const std::vector<std::uint64_t>& pulls() const noexcept { return pulls_; }
  std::uint64_t total_pulls() const noexcept;
  bool is_good(std::size_t i) const;
  double good_fraction() const;

  Label pull(std::size_t i, Rng& rng);

 private:
  std::vector<double> means_;
  std::vector<std::uint64_t> pulls_;
  double gamma_ = 0.0;
};

struct AgaResult {
  double estimate = 0.0;
  std::size_t arms_sampled = 0;   // s
  std::size_t pulls_per_arm = 0;  // q
  std::uint64_t pulls_used = 0;
};

/// s = chernoff(eps/2, 1/6) arms with replacement, q = ceil(ln(12 s)/(2 gamma^2))
/// pulls each, "good" on a strict majority of ones.
AgaResult natural_aga(ArmSet& arms, double gamma, double eps, Rng& rng);

struct StarConstants {
  double c1 = 1.0;  // c'
  double c2 = 1.0;  // c''
  double c3 = 1.0;  // c''' (soft only)
};

struct StarOptions {
  /// Reject eps outside the range the lower-bound proofs assume.
  bool enforce_proof_regime = false;
};

struct StarMeta {
  std::size_t m = 0;  // centers per star
  std::size_t b = 0;  // leaves per center
  std::size_t n = 1;  // stars
  std::size_t k = 0;
  std::size_t N = 0;  // pool size
  StarConstants constants;
  std::uint64_t seed = 0;
};

struct StarInstance {
  KnnInstance instance;
  StarMeta meta;
};

struct StarSizes {
  std::size_t k = 0, b = 0, N = 0, m = 0;
};

/// k = ceil(c' p^2/eps^2), b = ceil(6/eps), N = ceil(c''(1+b)k),
/// m = ceil(c''' N^2/(1+b)).
StarSizes soft_star_sizes(std::size_t p, double eps, const StarConstants& c);
/// b = ceil(3/eps), N = ceil(c'(1+b) n (k + ln(1/eps))), m = ceil(c'' N^2/((1+b) n)).
StarSizes hard_star_sizes(std::size_t n, std::size_t k, double eps, const StarConstants& c);

/// Distinct center radii, i.i.d. uniform(1,2) with collision redraw.
std::vector<double> draw_radii(std::size_t count, Rng& rng);

/// One star; leaves labeled 1, each center a coin of mean coin_mean; the pool
/// is N uniform draws from the ground set.
StarInstance build_star_instance_soft(std::size_t p, double eps, double coin_mean,
                                      const StarConstants& constants, std::uint64_t seed,
                                      const StarOptions& options = {});

/// One star per arm; leaves labeled 0, each center one pull of its arm.
StarInstance build_star_instance_hard(ArmSet& arms, std::size_t k, double eps,
                                      const StarConstants& constants, std::uint64_t seed,
                                      const StarOptions& options = {});

/// Exact k-NN hard error under the uniform distribution on a star instance,
/// grouping points that share a neighbour list instead of ranking each one.
double star_hard_error(const KnnInstance& inst, std::size_t k);

}  // namespace activetest

#endif  // ACTIVETEST_BANDIT_HPP_
