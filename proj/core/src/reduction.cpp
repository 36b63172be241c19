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

#include "activetest/reduction.hpp"

#include <algorithm>
#include <cmath>

namespace activetest {

namespace {

std::size_t sized(double raw) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(raw)));
}

void check(double eps, double constant) {
  if (!(eps > 0.0 && eps < 1.0) || !(constant > 0.0)) {
    fail(ErrorCode::kInvalidParameter, "sample size needs 0<eps<1 and c>0");
  }
}

}  // namespace

std::size_t pt_sample_size(std::size_t vc_dim, double eps, double constant) {
  check(eps, constant);
  const double vc = static_cast<double>(std::max<std::size_t>(vc_dim, 1));
  return sized(constant * vc / eps * std::log(1.0 / eps));
}

std::size_t da_sample_size(std::size_t vc_dim, double eps, double constant) {
  check(eps, constant);
  const double vc = static_cast<double>(std::max<std::size_t>(vc_dim, 1));
  return sized(constant * vc / (eps * eps) * std::log(1.0 / eps));
}

}  // namespace activetest
