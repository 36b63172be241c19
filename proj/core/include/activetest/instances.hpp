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

// Instance files (JSON) and the synthetic generators the harness draws
// its test targets from.

#ifndef ACTIVETEST_INSTANCES_HPP_
#define ACTIVETEST_INSTANCES_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "activetest/bandit.hpp"
#include "activetest/core.hpp"
#include "activetest/intervals.hpp"
#include "activetest/knn.hpp"

namespace activetest {

using Json = nlohmann::json;

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

// {points:[...], labels:[...], weights:[...]}; labels and weights optional
// (uniform weights when absent).
WeightedSample sample_from_json(const Json& j);
Json sample_to_json(const WeightedSample& s);

// {intervals:[[lo,hi],...]}
IntervalUnion hypothesis_from_json(const Json& j);
Json hypothesis_to_json(const IntervalUnion& g);

// {points, metric:"euclidean1d"|"explicit"|"star", distances?, star?,
//  pool_indices, labels}
KnnInstance knn_from_json(const Json& j);
Json knn_to_json(const KnnInstance& inst);

// {m,b,n,k,N,constants:{c1,c2,c3},seed}
Json star_meta_to_json(const StarMeta& meta);

// ---------------------------------------------------------------------------
// Generators

/// Target that is constant on each of `cells` equal cells of [0,1].
struct CellTarget {
  std::size_t cells = 0;
  std::vector<Label> labels;

  Label operator()(double x) const;
  /// Labeled midpoints, weight 1/cells each: exact under uniform [0,1].
  WeightedSample grid() const;
  TargetFunction<double> function() const;
};

/// One equal-width block of [0,1]: `intervals` random intervals strictly
/// inside the block, then each cell flipped independently with `noise`.
struct BlockPlan {
  std::size_t intervals = 0;
  double noise = 0.0;
};

CellTarget make_cell_target(std::size_t cells, const std::vector<BlockPlan>& blocks,
                            Rng& rng);

/// Points uniform on [0,1] (ground), labels from `segments` alternating
/// stripes flipped with `noise`, pool of `pool` i.i.d. ground ids.
KnnInstance make_line_knn(std::size_t ground, std::size_t pool, std::size_t segments,
                          double noise, Rng& rng);

}  // namespace activetest

#endif  // ACTIVETEST_INSTANCES_HPP_
