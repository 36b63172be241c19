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

// Monte Carlo trials: run an estimator many times with derived seeds,
// compare against exact truth and summarize the success rate.

#ifndef ACTIVETEST_HARNESS_HPP_
#define ACTIVETEST_HARNESS_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "activetest/instances.hpp"

namespace activetest {

struct TrialConfig {
  std::string algorithm;
  double eps = 0.1;
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  /// Algorithm and generator knobs (d, k, p, noise, ...); see README.
  std::map<std::string, double> params;
  std::optional<std::string> instance_path;
  /// Per-trial success probability the estimator promises.
  double success_target = 2.0 / 3.0;
  /// Success iff |output - truth| <= tolerance; defaults to eps.
  std::optional<double> tolerance;
  bool record_timing = true;
  std::size_t threads = 1;

  double param(const std::string& key, double fallback) const;
};

TrialConfig trial_config_from_json(const Json& j);
Json trial_config_to_json(const TrialConfig& c);

struct TrialRow {
  std::size_t trial = 0;
  double output = 0.0;
  double truth = 0.0;
  double abs_error = 0.0;
  bool success = false;
  std::uint64_t queries = 0;
  std::uint64_t unlabeled = 0;
  double millis = 0.0;
};

struct Aggregate {
  std::size_t trials = 0;
  std::size_t successes = 0;
  double success_rate = 0.0;
  double ci_low = 0.0;   // Wilson 95%
  double ci_high = 0.0;
  std::size_t required = 0;
  bool passed = false;
};

struct TrialReport {
  std::string algorithm;
  std::vector<TrialRow> rows;
  Aggregate aggregate;
};

/// floor(trials * (p0 - 1.96 sqrt(p0 (1 - p0) / trials))).
std::size_t required_successes(std::size_t trials, double p0);
std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials);
Aggregate aggregate_rows(const std::vector<TrialRow>& rows, double p0);

/// Algorithms: intervals-da, compose-da, union-da, knn-soft, knn-hard,
/// best-k, aga, star-aga. Throws kUnknownAlgorithm / kTruthUnavailable.
TrialReport run_trials(const TrialConfig& config);

std::vector<std::string> known_algorithms();

void write_csv(std::ostream& out, const TrialReport& report);
Json report_to_json(const TrialReport& report);
Aggregate aggregate_from_json(const Json& j);

/// Writes CSV or JSON depending on the extension of `path`.
void write_report(const std::string& path, const TrialReport& report);

}  // namespace activetest

#endif  // ACTIVETEST_HARNESS_HPP_
