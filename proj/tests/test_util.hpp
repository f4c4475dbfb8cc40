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

#ifndef CHAINSDF_TESTS_TEST_UTIL_HPP_
#define CHAINSDF_TESTS_TEST_UTIL_HPP_

#include <filesystem>
#include <functional>
#include <string>

#include "chainsdf/fixtures.hpp"
#include "chainsdf/robot_sdf.hpp"

namespace chainsdf::testutil {

/// Central difference of a scalar function.
inline double central_diff(const std::function<double(double)>& f, double x,
                           double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Planar 3-link model fitted at N=8, shared across test cases (the three
/// identical capsule links share one fit, so this is quick).
inline const robotsdf::RobotSdfModel& planar_model_n8() {
  static const robotsdf::RobotSdfModel model = [] {
    robotsdf::FitRobotConfig cfg;
    cfg.n_per_axis = 8;
    cfg.sampling.n_surface = 18000;
    cfg.sampling.n_uniform = 2000;
    cfg.fit.batch_size = 1024;
    cfg.seed = 7;
    return robotsdf::fit_robot(fixtures::planar_three_link(), cfg);
  }();
  return model;
}

/// Unique path under the build's temp space.
inline std::string temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "chainsdf_tests";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

/// Analytic capsule-union SDF of the planar fixture at configuration q,
/// written directly against the chain attachments (the test-side oracle).
inline double planar_oracle_sdf(const kinematics::KinematicChain& chain,
                                const VecX& q, const Vec3& p_world) {
  const auto frames = kinematics::forward_kinematics(chain, q);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& att : chain.attachments) {
    const auto pose = frames[att.frame].compose(att.local_pose);
    best = std::min(best, geometry::shape_sdf(att.shape,
                                              pose.apply_inverse(p_world)));
  }
  return best;
}

}  // namespace chainsdf::testutil

#endif  // CHAINSDF_TESTS_TEST_UTIL_HPP_
