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

// The acceptance suite: thirteen end-to-end checks, each one PASS/FAIL
// line. Shared by the acceptance test binary and `activetest run-suite`.

#ifndef ACTIVETEST_ACCEPTANCE_HPP_
#define ACTIVETEST_ACCEPTANCE_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace activetest {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::uint64_t seed = 20260101;
  std::size_t trials = 100;
  std::size_t threads = 1;
};

constexpr int kAcceptanceCriteria = 13;

/// Runs one criterion (1-based). Exceptions inside a criterion become a
/// FAIL with the message as detail.
CriterionResult run_criterion(int id, const AcceptanceOptions& options = {});

std::vector<CriterionResult> run_acceptance(
    const AcceptanceOptions& options = {},
    const std::function<void(const CriterionResult&)>& on_result = {});

/// "PASS  3 name: detail (0.12s)"
std::string format_result(const CriterionResult& r);

}  // namespace activetest

#endif  // ACTIVETEST_ACCEPTANCE_HPP_
