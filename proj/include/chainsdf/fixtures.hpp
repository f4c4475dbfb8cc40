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

#ifndef CHAINSDF_FIXTURES_HPP_
#define CHAINSDF_FIXTURES_HPP_

#include "chainsdf/avoid.hpp"
#include "chainsdf/planner.hpp"

namespace chainsdf::fixtures {

/// 3-link planar arm (classic DH, all joints about z) with one capsule per
/// link. Every oracle is analytic.
kinematics::KinematicChain planar_three_link();

/// 7-DoF arm in modified DH with the published Franka joint limits and
/// capsule/box approximations of each link. Meshes, when the user has them,
/// can be attached through the chain file instead.
kinematics::KinematicChain franka_arm();

/// Lift task on the planar arm: a box in front of the arm, one contact point
/// on its near face, interior anti-penetration points inside.
planner::LiftProblem planar_lift_problem(const robotsdf::RobotSdfModel& model);

/// Two planar arms facing each other; the obstacle arm sweeps a scripted
/// joint trajectory while the controlled arm reaches toward `target`.
avoid::AvoidanceScene two_arm_scene(const robotsdf::RobotSdfModel& controlled_model,
                                    const Vec3& target);

}  // namespace chainsdf::fixtures

#endif  // CHAINSDF_FIXTURES_HPP_
