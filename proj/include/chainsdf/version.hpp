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

#ifndef CHAINSDF_VERSION_HPP_
#define CHAINSDF_VERSION_HPP_

namespace chainsdf {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace chainsdf

#endif  // CHAINSDF_VERSION_HPP_
