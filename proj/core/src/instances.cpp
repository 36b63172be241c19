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

#include "activetest/instances.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace activetest {

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kFormat, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    fail(ErrorCode::kFormat, path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kFormat, "cannot write " + path);
  out << j.dump(2) << '\n';
}

namespace {

template <typename T>
std::vector<T> array_of(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    fail(ErrorCode::kFormat, std::string("missing array '") + key + "'");
  }
  try {
    return j.at(key).get<std::vector<T>>();
  } catch (const Json::exception& e) {
    fail(ErrorCode::kFormat, std::string(key) + ": " + e.what());
  }
}

std::vector<Label> labels_of(const Json& j) {
  std::vector<Label> out;
  for (int v : array_of<int>(j, "labels")) {
    if (v != 0 && v != 1) fail(ErrorCode::kFormat, "labels must be 0 or 1");
    out.push_back(static_cast<Label>(v));
  }
  return out;
}

}  // namespace

WeightedSample sample_from_json(const Json& j) {
  const auto points = array_of<double>(j, "points");
  std::vector<Label> labels;
  if (j.contains("labels")) labels = labels_of(j);
  std::vector<double> weights;
  if (j.contains("weights")) weights = array_of<double>(j, "weights");
  if (!labels.empty() && labels.size() != points.size()) {
    fail(ErrorCode::kFormat, "labels and points differ in length");
  }
  if (!weights.empty() && weights.size() != points.size()) {
    fail(ErrorCode::kFormat, "weights and points differ in length");
  }
  if (weights.empty()) return WeightedSample::uniform(points, labels);
  std::vector<SampleEntry> entries;
  for (std::size_t i = 0; i < points.size(); ++i) {
    SampleEntry e{points[i], weights[i], std::nullopt};
    if (!labels.empty()) e.label = labels[i];
    entries.push_back(e);
  }
  return WeightedSample(std::move(entries));
}

Json sample_to_json(const WeightedSample& s) {
  Json j;
  std::vector<double> points, weights;
  std::vector<int> labels;
  for (const auto& e : s.entries()) {
    points.push_back(e.point);
    weights.push_back(e.weight);
    if (e.label) labels.push_back(*e.label);
  }
  j["points"] = points;
  j["weights"] = weights;
  if (labels.size() == s.size() && !labels.empty()) j["labels"] = labels;
  return j;
}

IntervalUnion hypothesis_from_json(const Json& j) {
  std::vector<Interval> ivs;
  for (const auto& pair : array_of<std::vector<double>>(j, "intervals")) {
    if (pair.size() != 2) fail(ErrorCode::kFormat, "interval must be [lo, hi]");
    ivs.push_back({pair[0], pair[1]});
  }
  try {
    return IntervalUnion(std::move(ivs));
  } catch (const Error& e) {
    fail(ErrorCode::kFormat, e.what());
  }
}

Json hypothesis_to_json(const IntervalUnion& g) {
  Json arr = Json::array();
  for (const auto& iv : g.intervals()) arr.push_back({iv.lo, iv.hi});
  return Json{{"intervals", arr}};
}

KnnInstance knn_from_json(const Json& j) {
  const std::string metric = j.value("metric", std::string("euclidean1d"));
  MetricSpace space;
  if (metric == "euclidean1d") {
    space = MetricSpace::euclidean1d(array_of<double>(j, "points"));
  } else if (metric == "explicit") {
    space = MetricSpace::explicit_matrix(array_of<std::vector<double>>(j, "distances"));
  } else if (metric == "star") {
    if (!j.contains("star")) fail(ErrorCode::kFormat, "star metric needs a 'star' object");
    const Json& s = j.at("star");
    StarGeometry g;
    try {
      g.stars = s.at("stars").get<std::size_t>();
      g.centers = s.at("centers").get<std::size_t>();
      g.leaves = s.at("leaves").get<std::size_t>();
      g.radii = s.at("radii").get<std::vector<double>>();
      g.cross = s.value("cross", 10.0);
    } catch (const Json::exception& e) {
      fail(ErrorCode::kFormat, std::string("star: ") + e.what());
    }
    space = MetricSpace::star(std::move(g));
  } else {
    fail(ErrorCode::kFormat, "unknown metric '" + metric + "'");
  }
  auto pool = array_of<PointId>(j, "pool_indices");
  return KnnInstance(std::move(space), std::move(pool), labels_of(j));
}

Json knn_to_json(const KnnInstance& inst) {
  Json j;
  const auto& space = inst.space();
  switch (space.kind()) {
    case MetricSpace::Kind::kEuclidean1d:
      j["metric"] = "euclidean1d";
      j["points"] = space.coords();
      break;
    case MetricSpace::Kind::kExplicit: {
      j["metric"] = "explicit";
      std::vector<std::size_t> ids(space.size());
      std::iota(ids.begin(), ids.end(), std::size_t{0});
      j["points"] = ids;
      j["distances"] = space.matrix();
      break;
    }
    case MetricSpace::Kind::kStar: {
      const auto& g = space.geometry();
      j["metric"] = "star";
      j["star"] = {{"stars", g.stars}, {"centers", g.centers}, {"leaves", g.leaves},
                   {"radii", g.radii}, {"cross", g.cross}};
      break;
    }
    case MetricSpace::Kind::kCustom:
      fail(ErrorCode::kFormat, "custom metrics cannot be serialized");
  }
  j["pool_indices"] = inst.pool();
  std::vector<int> labels(inst.labels().begin(), inst.labels().end());
  j["labels"] = labels;
  return j;
}

Json star_meta_to_json(const StarMeta& meta) {
  return Json{{"m", meta.m},
              {"b", meta.b},
              {"n", meta.n},
              {"k", meta.k},
              {"N", meta.N},
              {"constants", {{"c1", meta.constants.c1},
                             {"c2", meta.constants.c2},
                             {"c3", meta.constants.c3}}},
              {"seed", meta.seed}};
}

// ---------------------------------------------------------------------------

Label CellTarget::operator()(double x) const {
  const double c = std::floor(x * static_cast<double>(cells));
  std::size_t i = c <= 0.0 ? 0 : static_cast<std::size_t>(c);
  if (i >= cells) i = cells - 1;
  return labels[i];
}

WeightedSample CellTarget::grid() const {
  return grid_sample(cells, function());
}

TargetFunction<double> CellTarget::function() const {
  // Copies the table so the function can outlive this object.
  return [t = *this](double x) { return t(x); };
}

CellTarget make_cell_target(std::size_t cells, const std::vector<BlockPlan>& blocks,
                            Rng& rng) {
  if (blocks.empty() || cells == 0 || cells % blocks.size() != 0) {
    fail(ErrorCode::kInvalidParameter, "cells must split evenly into blocks");
  }
  CellTarget t;
  t.cells = cells;
  t.labels.assign(cells, 0);
  const std::size_t width = cells / blocks.size();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const BlockPlan& plan = blocks[b];
    const std::size_t base = b * width;
    if (2 * plan.intervals + 1 > width) {
      fail(ErrorCode::kInvalidParameter, "block too narrow for its intervals");
    }
    if (!(plan.noise >= 0.0 && plan.noise <= 1.0)) {
      fail(ErrorCode::kInvalidParameter, "noise outside [0,1]");
    }
    // 2k distinct cut points in 1..width-1; runs alternate out/in.
    std::vector<std::size_t> cuts(width - 1);
    std::iota(cuts.begin(), cuts.end(), std::size_t{1});
    std::vector<std::size_t> chosen;
    std::sample(cuts.begin(), cuts.end(), std::back_inserter(chosen), 2 * plan.intervals,
                rng);
    for (std::size_t i = 0; i + 1 < chosen.size(); i += 2) {
      for (std::size_t c = chosen[i]; c < chosen[i + 1]; ++c) t.labels[base + c] = 1;
    }
    std::bernoulli_distribution flip(plan.noise);
    for (std::size_t c = 0; c < width; ++c) {
      if (flip(rng)) t.labels[base + c] ^= 1;
    }
  }
  return t;
}

KnnInstance make_line_knn(std::size_t ground, std::size_t pool, std::size_t segments,
                          double noise, Rng& rng) {
  if (ground == 0 || pool == 0 || segments == 0) {
    fail(ErrorCode::kInvalidParameter, "line instance needs points, pool and segments");
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> coords(ground);
  for (auto& x : coords) x = u(rng);
  std::sort(coords.begin(), coords.end());
  std::bernoulli_distribution flip(noise);
  std::vector<Label> labels(ground);
  for (std::size_t i = 0; i < ground; ++i) {
    const auto stripe = static_cast<std::size_t>(coords[i] * static_cast<double>(segments));
    labels[i] = static_cast<Label>((stripe % 2) ^ (flip(rng) ? 1 : 0));
  }
  std::uniform_int_distribution<std::size_t> pick(0, ground - 1);
  std::vector<PointId> ids(pool);
  for (auto& x : ids) x = static_cast<PointId>(pick(rng));
  return KnnInstance(MetricSpace::euclidean1d(std::move(coords)), std::move(ids),
                     std::move(labels));
}

}  // namespace activetest
