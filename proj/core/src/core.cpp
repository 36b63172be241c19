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

#include "activetest/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace activetest {

std::string_view error_phrase(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidParameter:
      return "invalid parameter";
    case ErrorCode::kInvalidClassParameter:
      return "invalid class parameter";
    case ErrorCode::kBudgetExceeded:
      return "budget exceeded";
    case ErrorCode::kDomainMismatch:
      return "domain mismatch";
    case ErrorCode::kInfiniteDivergence:
      return "infinite divergence";
    case ErrorCode::kRegimeViolation:
      return "parameter regime violated";
    case ErrorCode::kInsufficientPool:
      return "insufficient pool";
    case ErrorCode::kPartitionViolation:
      return "partition violation";
    case ErrorCode::kInvalidK:
      return "invalid k";
    case ErrorCode::kDegenerateWeights:
      return "degenerate weights";
    case ErrorCode::kBadIndex:
      return "bad index";
    case ErrorCode::kUnknownAlgorithm:
      return "unknown algorithm";
    case ErrorCode::kTruthUnavailable:
      return "truth oracle unavailable";
    case ErrorCode::kFormat:
      return "malformed input";
  }
  return "error";
}

namespace {

std::string compose_message(ErrorCode code, std::string_view detail) {
  std::string msg(error_phrase(code));
  if (!detail.empty()) {
    msg += ": ";
    msg += detail;
  }
  return msg;
}

}  // namespace

Error::Error(ErrorCode code, std::string_view detail)
    : std::runtime_error(compose_message(code, detail)), code_(code) {}

void fail(ErrorCode code, std::string_view detail) { throw Error(code, detail); }

std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
  return mix_seed(mix_seed(base) ^ (stream * 0xd1b54a32d192ed03ULL));
}

// ---------------------------------------------------------------------------

WeightedSample::WeightedSample(std::vector<SampleEntry> entries)
    : entries_(std::move(entries)) {
  for (const auto& e : entries_) {
    if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) {
      fail(ErrorCode::kInvalidParameter, "sample weights must be nonnegative");
    }
  }
}

WeightedSample WeightedSample::uniform(std::span<const double> points,
                                       std::span<const Label> labels) {
  if (!labels.empty() && labels.size() != points.size()) {
    fail(ErrorCode::kDomainMismatch, "points and labels differ in length");
  }
  std::vector<SampleEntry> entries;
  entries.reserve(points.size());
  const double w = points.empty() ? 0.0 : 1.0 / static_cast<double>(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    SampleEntry e{points[i], w, std::nullopt};
    if (!labels.empty()) e.label = labels[i];
    entries.push_back(e);
  }
  return WeightedSample(std::move(entries));
}

void WeightedSample::add(double point, double weight, std::optional<Label> label) {
  if (!(weight >= 0.0) || !std::isfinite(weight)) {
    fail(ErrorCode::kInvalidParameter, "sample weights must be nonnegative");
  }
  entries_.push_back({point, weight, label});
}

double WeightedSample::total_weight() const noexcept {
  double s = 0.0;
  for (const auto& e : entries_) s += e.weight;
  return s;
}

bool WeightedSample::is_normalized(double tol) const noexcept {
  return std::abs(total_weight() - 1.0) <= tol;
}

bool WeightedSample::fully_labeled() const noexcept {
  return std::all_of(entries_.begin(), entries_.end(),
                     [](const SampleEntry& e) { return e.label.has_value(); });
}

double empirical_distance(const WeightedSample& a, const WeightedSample& b) {
  if (a.size() != b.size()) {
    fail(ErrorCode::kDomainMismatch, "labelings have different supports");
  }
  double dist = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a[i];
    const auto& y = b[i];
    if (x.point != y.point || x.weight != y.weight) {
      fail(ErrorCode::kDomainMismatch,
           "entry " + std::to_string(i) + " differs between labelings");
    }
    if (!x.label || !y.label) {
      fail(ErrorCode::kDomainMismatch,
           "entry " + std::to_string(i) + " is unlabeled");
    }
    if (*x.label != *y.label) dist += x.weight;
  }
  return dist;
}

// ---------------------------------------------------------------------------

IndexDistribution::IndexDistribution(std::span<const double> weights)
    : size_(weights.size()) {
  if (weights.empty()) {
    fail(ErrorCode::kInvalidParameter, "empty weight vector");
  }
  cumulative_.reserve(weights.size());
  double acc = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      fail(ErrorCode::kInvalidParameter, "weights must be nonnegative");
    }
    acc += w;
    cumulative_.push_back(acc);
  }
  if (!(acc > 0.0)) fail(ErrorCode::kDegenerateWeights, "all weights are zero");
  total_ = acc;
}

IndexDistribution IndexDistribution::uniform(std::size_t n) {
  if (n == 0) fail(ErrorCode::kInvalidParameter, "empty support");
  IndexDistribution d;
  d.size_ = n;
  d.total_ = static_cast<double>(n);
  return d;
}

double IndexDistribution::probability(std::size_t i) const {
  if (i >= size_) fail(ErrorCode::kBadIndex, "index outside support");
  if (cumulative_.empty()) return 1.0 / static_cast<double>(size_);
  const double lo = i == 0 ? 0.0 : cumulative_[i - 1];
  return (cumulative_[i] - lo) / total_;
}

std::size_t IndexDistribution::sample(Rng& rng) const {
  if (size_ == 0) fail(ErrorCode::kInvalidParameter, "empty support");
  if (cumulative_.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
    return pick(rng);
  }
  std::uniform_real_distribution<double> u(0.0, total_);
  const double r = u(rng);
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), r);
  std::size_t i = static_cast<std::size_t>(it - cumulative_.begin());
  if (i >= size_) {
    // r rounded up to the total; fall back to the last atom with mass.
    i = size_ - 1;
    while (i > 0 && probability(i) == 0.0) --i;
  }
  return i;
}

Distribution Distribution::uniform01() { return Distribution{}; }

Distribution Distribution::finite(std::vector<double> atoms,
                                  std::vector<double> weights) {
  if (atoms.size() != weights.size() || atoms.empty()) {
    fail(ErrorCode::kInvalidParameter, "atoms and weights must match");
  }
  Distribution d;
  d.kind_ = Kind::kFiniteWeighted;
  d.weights_ = IndexDistribution(weights);
  d.atoms_ = std::move(atoms);
  return d;
}

Distribution Distribution::from_inverse_cdf(
    std::function<double(double)> inverse_cdf) {
  if (!inverse_cdf) fail(ErrorCode::kInvalidParameter, "missing inverse cdf");
  Distribution d;
  d.kind_ = Kind::kCustomCdf;
  d.inverse_cdf_ = std::move(inverse_cdf);
  return d;
}

double Distribution::sample(Rng& rng) const {
  switch (kind_) {
    case Kind::kUniform01: {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      return u(rng);
    }
    case Kind::kFiniteWeighted:
      return atoms_[weights_.sample(rng)];
    case Kind::kCustomCdf: {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      return inverse_cdf_(u(rng));
    }
  }
  return 0.0;
}

std::vector<double> Distribution::sample_n(std::size_t n, Rng& rng) const {
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample(rng));
  return out;
}

// ---------------------------------------------------------------------------

namespace {

double xlogx_over(double x, double y) {
  if (x == 0.0) return 0.0;
  return x * std::log(x / y);
}

}  // namespace

double relative_entropy(double x, double y) {
  if (!(x >= 0.0 && x <= 1.0) || !(y >= 0.0 && y <= 1.0)) {
    fail(ErrorCode::kInvalidParameter, "relative entropy arguments must lie in [0,1]");
  }
  if (y == 0.0 || y == 1.0) {
    if (x == y) return 0.0;
    fail(ErrorCode::kInfiniteDivergence, "y on the boundary with x != y");
  }
  const double d = xlogx_over(x, y) + xlogx_over(1.0 - x, 1.0 - y);
  return d < 0.0 ? 0.0 : d;
}

std::size_t chernoff_iterations(double eps, double delta) {
  if (!(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0)) {
    fail(ErrorCode::kInvalidParameter, "chernoff_iterations needs 0<eps<1, 0<delta<1");
  }
  const double raw = std::log(2.0 / delta) / (2.0 * eps * eps);
  return static_cast<std::size_t>(std::ceil(raw - 1e-9));
}

std::size_t median_repetitions(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    fail(ErrorCode::kInvalidParameter, "median_repetitions needs 0<delta<1");
  }
  auto r = static_cast<std::size_t>(std::ceil(18.0 * std::log(1.0 / delta) - 1e-9));
  if (r == 0) r = 1;
  if (r % 2 == 0) ++r;
  return r;
}

double median(std::vector<double> values) {
  if (values.empty()) fail(ErrorCode::kInvalidParameter, "median of nothing");
  const std::size_t mid = (values.size() - 1) / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid),
                   values.end());
  return values[mid];
}

}  // namespace activetest
