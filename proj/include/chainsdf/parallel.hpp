// Copyright 2026 The chainsdf Authors
//
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

#ifndef CHAINSDF_PARALLEL_HPP_
#define CHAINSDF_PARALLEL_HPP_

#include <cstdint>

namespace chainsdf {

/// Execution policy for the data-parallel kernels. Serial is the reference
/// path; OpenMP parallelizes over independent output elements, so results are
/// identical between the two policies (tests assert bitwise equality).
enum class Exec { Serial, OpenMP };

/// Runs fn(i) for i in [0, n). Every iteration must write disjoint outputs.
template <typename F>
void parallel_for(std::int64_t n, Exec exec, F&& fn) {
  if (exec == Exec::OpenMP) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) fn(i);
  } else {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
  }
}

}  // namespace chainsdf

#endif  // CHAINSDF_PARALLEL_HPP_
