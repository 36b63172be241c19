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

// Turning query-model testers and distance approximators into active ones.
//
// The wrapper draws N unlabeled points from the unknown distribution, hands
// the wrapped algorithm the uniform empirical distribution over them, and
// lets it query labels of those atoms only. No labels are added.

#ifndef ACTIVETEST_REDUCTION_HPP_
#define ACTIVETEST_REDUCTION_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>

#include "activetest/core.hpp"

namespace activetest {

/// What a query algorithm sees: the support (uniform weights 1/N, duplicates
/// kept as separate atoms), label access by atom index, and its accuracy.
struct QueryContext {
  const WeightedSample& support;
  LinePool& atoms;
  double eps;
  Rng& rng;
};

template <typename Output>
struct QueryAlgorithm {
  std::function<Output(QueryContext&)> run;
  /// Upper bound on label queries; enforced as the oracle budget.
  std::uint64_t declared_queries = 0;
};

template <typename Output>
struct ReductionResult {
  Output output{};
  std::uint64_t queries_used = 0;
  std::size_t unlabeled_used = 0;
};

/// floor(c * (vc/eps) * ln(1/eps)), at least 1.
std::size_t pt_sample_size(std::size_t vc_dim, double eps, double constant = 1.0);
/// floor(c * (vc/eps^2) * ln(1/eps)), at least 1.
std::size_t da_sample_size(std::size_t vc_dim, double eps, double constant = 1.0);

namespace detail {

template <typename Output>
ReductionResult<Output> run_on_empirical(const QueryAlgorithm<Output>& alg,
                                         std::size_t n, double eps,
                                         const Distribution& dist,
                                         const TargetFunction<double>& target,
                                         Rng& rng) {
  if (!alg.run) fail(ErrorCode::kInvalidParameter, "query algorithm has no body");
  std::vector<double> points = dist.sample_n(n, rng);
  const WeightedSample support = WeightedSample::uniform(points);
  LinePool atoms(std::move(points), LineOracle(target, alg.declared_queries));
  QueryContext ctx{support, atoms, eps / 2.0, rng};
  ReductionResult<Output> out;
  out.output = alg.run(ctx);
  out.queries_used = atoms.queries_used();
  out.unlabeled_used = n;
  return out;
}

inline void check_reduction_eps(double eps) {
  if (!(eps > 0.0 && eps < 0.5)) {
    fail(ErrorCode::kInvalidParameter, "reduction needs 0 < eps < 1/2");
  }
}

}  // namespace detail

/// Property tester for D at accuracy eps from a query tester run at eps/2 on
/// the empirical distribution of pt_sample_size(vc_dim, eps) draws.
template <typename Output>
ReductionResult<Output> activeize_pt(const QueryAlgorithm<Output>& alg,
                                     std::size_t vc_dim, double eps,
                                     const Distribution& dist,
                                     const TargetFunction<double>& target, Rng& rng,
                                     double constant = 1.0) {
  detail::check_reduction_eps(eps);
  return detail::run_on_empirical(alg, pt_sample_size(vc_dim, eps, constant), eps,
                                  dist, target, rng);
}

/// Distance approximation for D; as activeize_pt with the eps^-2 sample size
/// that two-sided uniform convergence needs.
template <typename Output>
ReductionResult<Output> activeize_da(const QueryAlgorithm<Output>& alg,
                                     std::size_t vc_dim, double eps,
                                     const Distribution& dist,
                                     const TargetFunction<double>& target, Rng& rng,
                                     double constant = 1.0) {
  detail::check_reduction_eps(eps);
  return detail::run_on_empirical(alg, da_sample_size(vc_dim, eps, constant), eps,
                                  dist, target, rng);
}

}  // namespace activetest

#endif  // ACTIVETEST_REDUCTION_HPP_
