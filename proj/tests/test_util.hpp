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

// Shared test helpers: error-code assertions and hand-rolled generators.

#ifndef ACTIVETEST_TESTS_TEST_UTIL_HPP_
#define ACTIVETEST_TESTS_TEST_UTIL_HPP_

#include <gtest/gtest.h>

#include <random>
#include <string>
#include <vector>

#include "activetest/core.hpp"

namespace activetest::testing {

// Runs f and checks it throws Error with `code` and a message starting with
// the code's phrase.
template <typename F>
void ExpectError(F&& f, ErrorCode code) {
  try {
    f();
    ADD_FAILURE() << "expected error '" << error_phrase(code) << "'";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
    EXPECT_EQ(std::string(e.what()).rfind(std::string(error_phrase(code)), 0), 0u) << e.what();
  }
}

inline std::size_t UniformInt(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// n points on a grid of `slots` values in (0,1) (so duplicates occur),
// uniform weights, fair-coin labels.
inline WeightedSample RandomLineSample(Rng& rng, std::size_t n, std::size_t slots = 10) {
  std::vector<double> points;
  std::vector<Label> labels;
  std::bernoulli_distribution coin(0.5);
  for (std::size_t i = 0; i < n; ++i) {
    points.push_back((static_cast<double>(UniformInt(rng, 0, slots - 1)) + 0.5) /
                     static_cast<double>(slots));
    labels.push_back(coin(rng) ? 1 : 0);
  }
  return WeightedSample::uniform(points, labels);
}

}  // namespace activetest::testing

#endif  // ACTIVETEST_TESTS_TEST_UTIL_HPP_
