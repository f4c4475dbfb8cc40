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

#ifndef CHAINSDF_PLANNER_HPP_
#define CHAINSDF_PLANNER_HPP_

#include <string>
#include <vector>

#include "chainsdf/robot_sdf.hpp"

namespace chainsdf::planner {

/// One arm: a fitted robot SDF plus the pose of its base in the world.
using ArmModel = robotsdf::PosedModel;

/// Whole-body contact task. Contact normals are the desired robot surface
/// outward normals at each contact (for an object face this is the face's
/// inward normal; the robot presses along +n).
struct LiftProblem {
  std::vector<ArmModel> arms;    // one or two
  PointMatrix contact_points;    // world, m
  PointMatrix contact_normals;   // unit
  PointMatrix interior_points;   // points inside the object, world
  VecX q_init;                   // stacked across arms
  struct Weights {
    double reach = 1.0;
    double penetration = 10.0;
    double limits = 10.0;
    double posture = 0.05;
  } weights;
  /// Plans contacts this far past the surface along +n (press-in margin).
  double contact_inset = 0.0;

  int total_dof() const;
  void validate() const;
  /// Contact -> arm assignment by nearest arm base.
  std::vector<int> contact_assignment() const;
};

struct GnConfig {
  int max_iters = 200;
  double backtrack_factor = 0.5;
  double alpha_min = 1.0 / 1024.0;
  double damping = 1e-6;         // Levenberg floor; grows x10 on failure
  double damping_max = 1e-2;
  double step_tol = 1e-8;        // |dq| below this stalls
  double rho = 100.0;            // soft-min sharpness inside residuals
  Exec exec = Exec::OpenMP;

  void validate() const {
    require(max_iters >= 1, "GnConfig: max_iters must be >= 1");
    require(backtrack_factor > 0.0 && backtrack_factor < 1.0,
            "GnConfig: backtracking factor must lie in (0, 1)");
    require(damping >= 0.0, "GnConfig: damping must be non-negative");
  }
};

struct TerminationTols {
  double reach_sq = 0.01;
  double penetration_sq = 0.01;
  double normal_sum = 0.1;
};

struct TerminationFlags {
  bool reach = false;
  bool penetration = false;
  bool limits = false;
  bool normals = false;
  bool all() const { return reach && penetration && limits && normals; }
};

enum class PlanStatus { Converged, MaxIters, Stalled };

struct PlanSolution {
  VecX q_final;
  PlanStatus status = PlanStatus::MaxIters;
  int iterations = 0;
  int seed_index = 0;
  double cost = 0.0;  // weighted r^T r at q_final
  // Raw (unweighted) block norms at q_final.
  double norm_reach = 0.0;
  double norm_penetration = 0.0;
  double norm_limits = 0.0;
  double norm_posture = 0.0;
  TerminationFlags flags;
};

/// Weighted residual stack, in block order
///   [reach (n_c); penetration (n_arms * n_i); ReLU(q - q_max);
///    ReLU(q_min - q); posture (q - q_init)],
/// each block scaled by its weight. Distance terms use the soft-min mode.
VecX residuals(const LiftProblem& problem, const VecX& q, double rho = 100.0);

/// Analytic Jacobian of `residuals`. Inactive ReLU entries contribute
/// exactly-zero rows (subgradient at 0 taken as 0).
MatX residual_jacobian(const LiftProblem& problem, const VecX& q,
                       double rho = 100.0);

TerminationFlags termination_check(const LiftProblem& problem, const VecX& q,
                                   const TerminationTols& tols = {},
                                   double rho = 100.0);

PlanSolution gauss_newton(const LiftProblem& problem, const GnConfig& cfg,
                          const VecX& q0);

/// Runs gauss_newton from n_seeds uniform-in-limit starts; converged
/// solutions first, then by cost. Deterministic per seed.
std::vector<PlanSolution> batch_plan(const LiftProblem& problem,
                                     const GnConfig& cfg, int n_seeds,
                                     std::uint64_t seed);

struct Trajectory {
  std::vector<double> times;  // seconds
  std::vector<VecX> waypoints;
};

/// Per-joint cubic with zero boundary velocities, sampled every dt with the
/// endpoint included exactly.
Trajectory cubic_spline_trajectory(const VecX& q_start, const VecX& q_goal,
                                   double duration, double dt);

// Problem file (JSON, versioned); model paths resolve relative to the file.
LiftProblem load_problem_json(const std::string& path);
void save_problem_json(const LiftProblem& problem,
                       const std::vector<std::string>& model_paths,
                       const std::string& path);

/// Solution report CSV: one row per seed.
void save_solutions_csv(const std::vector<PlanSolution>& solutions,
                        const std::string& path);

/// Trajectory CSV: t followed by joint values.
void save_trajectory_csv(const Trajectory& traj, const std::string& path);

}  // namespace chainsdf::planner

#endif  // CHAINSDF_PLANNER_HPP_
