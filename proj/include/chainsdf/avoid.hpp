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

#ifndef CHAINSDF_AVOID_HPP_
#define CHAINSDF_AVOID_HPP_

#include <string>
#include <variant>
#include <vector>

#include "chainsdf/robot_sdf.hpp"

namespace chainsdf::avoid {

/// Timed joint waypoints, linearly interpolated and clamped at the ends.
struct ObstacleScript {
  std::vector<double> times;
  std::vector<VecX> configs;

  VecX at(double t) const;
  void validate() const;
};

/// A second articulated body acting as the (moving) obstacle.
struct ObstacleChain {
  kinematics::KinematicChain chain;
  kinematics::Pose base_pose;
  ObstacleScript script;
};

struct AvoidanceScene {
  robotsdf::PosedModel controlled;
  std::variant<ObstacleChain, PointMatrix> obstacle;
  Vec3 target = Vec3::Zero();  // world end-effector goal
  int n_obstacle_samples = 256;

  void validate() const;
};

struct ControllerConfig {
  double d_safe = 0.05;        // m, distance constraint level set
  double xi = 4.0;             // 1/s, constraint gain
  double dt = 0.02;            // s, control period
  double qd_max = 1.0;         // rad/s per joint
  double slack_weight = 1e4;   // quadratic penalty on the constraint slack
  double mu = 0.01;            // joint velocity damping in the objective
  double kp = 2.0;             // 1/s, proportional reaching gain
  double v_max = 0.5;          // m/s, cap on the commanded task velocity
  int worst_k = 8;             // constrained obstacle points per step
  double reach_tol = 0.01;     // m, target-reached threshold

  void validate() const {
    require(d_safe > 0.0, "ControllerConfig: d_safe must be positive");
    require(xi > 0.0, "ControllerConfig: xi must be positive");
    require(dt > 0.0, "ControllerConfig: dt must be positive");
    require(qd_max > 0.0, "ControllerConfig: qd_max must be positive");
  }
};

/// Dense strictly convex QP
///   min 1/2 x^T H x + g^T x   s.t.  A x >= b,  lower <= x <= upper,
/// with +/-infinity for absent bounds.
struct QpProblem {
  MatX hessian;
  VecX gradient;
  MatX a_ineq;   // may have zero rows
  VecX b_ineq;
  VecX lower;
  VecX upper;

  void validate() const;
};

enum class QpStatus { Optimal, Infeasible };

struct QpSolution {
  VecX x;
  QpStatus status = QpStatus::Infeasible;
  std::vector<int> active_set;   // row indices of A at the optimum
  VecX multipliers;              // one per A row, zero when inactive
  int iterations = 0;
  /// KKT residuals at the reported optimum (stationarity, feasibility,
  /// complementarity), for auditing.
  double kkt_stationarity = 0.0;
  double kkt_feasibility = 0.0;
  double kkt_complementarity = 0.0;
};

/// Primal active-set solve with an internal slack phase when the start is
/// infeasible. The cycling guard reports Infeasible with diagnostics.
QpSolution solve_qp(const QpProblem& prob);

/// Area-uniform world-frame surface samples of the obstacle at configuration
/// obstacle_q (ignored for point-cloud obstacles, which are subsampled).
PointMatrix sample_obstacle_points(const AvoidanceScene& scene,
                                   const VecX& obstacle_q, std::uint64_t seed);

/// Velocity-level controller step: track a capped proportional reaching
/// velocity subject to slack-augmented distance constraints
///   grad_q f(p)^T qd >= -xi (f(p) - d_safe) - s
/// on the worst-K obstacle points, with per-joint velocity and joint-limit
/// deceleration bounds. Decision variable x = [qd; s].
QpProblem build_qp(const AvoidanceScene& scene, const ControllerConfig& cfg,
                   const VecX& q, const PointMatrix& obstacle_points);

struct EpisodeReport {
  bool reached = false;
  int steps = 0;
  int qp_infeasible_count = 0;
  double min_distance_seen = std::numeric_limits<double>::infinity();  // oracle
  double max_slack = 0.0;
  double wall_ms = 0.0;
  std::vector<VecX> trajectory;  // controlled joint path, one entry per step
};

/// Kinematic simulation: integrate q <- q + dt qd with re-sampled obstacle
/// points each step; terminates on reach, QP infeasibility, or max_steps.
/// The oracle minimum distance (true geometry, current obstacle samples) is
/// logged every step.
EpisodeReport run_episode(const AvoidanceScene& scene,
                          const ControllerConfig& cfg, const VecX& q0,
                          int max_steps, std::uint64_t seed);

// Scene file (JSON, versioned); model/chain paths resolve relative to it.
AvoidanceScene load_scene_json(const std::string& path);

/// Episode report CSV: columns
/// reached,qp_infeasible,min_distance_m,steps,wall_ms and a trailing summary
/// row (rates, min, means).
void save_episodes_csv(const std::vector<EpisodeReport>& episodes,
                       const std::string& path);

}  // namespace chainsdf::avoid

#endif  // CHAINSDF_AVOID_HPP_
