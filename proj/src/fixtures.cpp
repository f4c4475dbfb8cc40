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

#include "chainsdf/fixtures.hpp"

#include <cmath>

namespace chainsdf::fixtures {

using geometry::BoxShape;
using geometry::Capsule;
using kinematics::Attachment;
using kinematics::DhConvention;
using kinematics::DhRow;
using kinematics::JointKind;
using kinematics::KinematicChain;
using kinematics::Pose;

namespace {

constexpr double kPlanarLinkLength = 0.3;
constexpr double kPlanarLinkRadius = 0.06;

Attachment capsule_along_x(int frame, double length, double radius) {
  Attachment att;
  att.frame = frame;
  att.shape = Capsule{Vec3(-length, 0.0, 0.0), Vec3::Zero(), radius};
  return att;
}

}  // namespace

KinematicChain planar_three_link() {
  KinematicChain chain;
  chain.convention = DhConvention::Classic;
  for (int i = 0; i < 3; ++i) {
    DhRow row;
    row.a = kPlanarLinkLength;
    chain.rows.push_back(row);
  }
  chain.q_min = VecX::Constant(3, -2.9);
  chain.q_max = VecX::Constant(3, 2.9);
  for (int frame = 1; frame <= 3; ++frame)
    chain.attachments.push_back(
        capsule_along_x(frame, kPlanarLinkLength, kPlanarLinkRadius));
  return chain;
}

KinematicChain franka_arm() {
  KinematicChain chain;
  chain.convention = DhConvention::Modified;
  // (a_{i-1}, d_i, alpha_{i-1}); the trailing fixed row is the flange.
  const double rows[8][3] = {
      {0.0, 0.333, 0.0},          {0.0, 0.0, -M_PI_2},
      {0.0, 0.316, M_PI_2},       {0.0825, 0.0, M_PI_2},
      {-0.0825, 0.384, -M_PI_2},  {0.0, 0.0, M_PI_2},
      {0.088, 0.0, M_PI_2},       {0.0, 0.107, 0.0}};
  for (int i = 0; i < 8; ++i) {
    DhRow row;
    row.a = rows[i][0];
    row.d = rows[i][1];
    row.alpha = rows[i][2];
    row.kind = i < 7 ? JointKind::Revolute : JointKind::Fixed;
    chain.rows.push_back(row);
  }
  chain.q_min.resize(7);
  chain.q_max.resize(7);
  chain.q_min << -2.8973, -1.7628, -2.8973, -3.0718, -2.8973, -0.0175, -2.8973;
  chain.q_max << 2.8973, 1.7628, 2.8973, -0.0698, 2.8973, 3.7525, 2.8973;

  // Coarse capsule stand-ins for the link bodies, in each link frame. The
  // fingertips are not modeled.
  auto capsule = [](int frame, const Vec3& a, const Vec3& b, double r) {
    Attachment att;
    att.frame = frame;
    att.shape = Capsule{a, b, r};
    return att;
  };
  chain.attachments.push_back(
      capsule(1, Vec3(0, 0, -0.23), Vec3(0, 0, 0.0), 0.075));
  chain.attachments.push_back(
      capsule(2, Vec3(0, 0, 0), Vec3(0, -0.18, 0), 0.075));
  chain.attachments.push_back(
      capsule(3, Vec3(0, 0, -0.12), Vec3(0, 0, 0), 0.065));
  chain.attachments.push_back(
      capsule(4, Vec3(-0.0825, 0.06, 0), Vec3(0, 0, 0), 0.065));
  chain.attachments.push_back(
      capsule(5, Vec3(0, 0, -0.26), Vec3(0, 0.06, -0.06), 0.06));
  chain.attachments.push_back(
      capsule(6, Vec3(0, 0, -0.03), Vec3(0.088, 0, 0), 0.06));
  chain.attachments.push_back(
      capsule(7, Vec3(0, 0, 0.0), Vec3(0, 0, 0.08), 0.06));
  chain.attachments.push_back(
      capsule(8, Vec3(0, 0, 0.0), Vec3(0, 0, 0.06), 0.05));
  return chain;
}

planner::LiftProblem planar_lift_problem(
    const robotsdf::RobotSdfModel& model) {
  planner::LiftProblem problem;
  planner::ArmModel arm;
  arm.model = model;
  problem.arms.push_back(std::move(arm));

  // A box ahead of the arm; one contact on the near face. The normal is the
  // desired robot-outward direction, i.e. pointing into the box.
  const Vec3 box_center(0.55, 0.0, 0.0);
  const Vec3 box_half(0.10, 0.10, 0.10);

  problem.contact_points.resize(1, 3);
  problem.contact_points.row(0) =
      Vec3(box_center[0] - box_half[0], 0.0, 0.0).transpose();
  problem.contact_normals.resize(1, 3);
  problem.contact_normals.row(0) = Vec3(1.0, 0.0, 0.0).transpose();

  problem.interior_points.resize(5, 3);
  problem.interior_points.row(0) = box_center.transpose();
  problem.interior_points.row(1) =
      (box_center + Vec3(-0.05, 0.05, 0.0)).transpose();
  problem.interior_points.row(2) =
      (box_center + Vec3(-0.05, -0.05, 0.0)).transpose();
  problem.interior_points.row(3) =
      (box_center + Vec3(0.05, 0.05, 0.0)).transpose();
  problem.interior_points.row(4) =
      (box_center + Vec3(0.05, -0.05, 0.0)).transpose();

  problem.q_init.resize(3);
  problem.q_init << 0.3, -0.5, 0.4;
  return problem;
}

avoid::AvoidanceScene two_arm_scene(
    const robotsdf::RobotSdfModel& controlled_model, const Vec3& target) {
  avoid::AvoidanceScene scene;
  scene.controlled.model = controlled_model;

  avoid::ObstacleChain obstacle;
  obstacle.chain = planar_three_link();
  obstacle.base_pose.translation = Vec3(0.9, 0.0, 0.0);
  obstacle.base_pose.rotation =
      Eigen::AngleAxisd(M_PI, Vec3::UnitZ()).toRotationMatrix();

  // Slow sweep of the obstacle arm (joint speeds <= 0.1 rad/s).
  VecX qa(3), qb(3);
  qa << 0.4, 0.2, 0.1;
  qb << -0.4, -0.2, -0.1;
  obstacle.script.times = {0.0, 8.0};
  obstacle.script.configs = {qa, qb};
  scene.obstacle = std::move(obstacle);

  scene.target = target;
  scene.n_obstacle_samples = 256;
  return scene;
}

}  // namespace chainsdf::fixtures
