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

#ifndef CHAINSDF_ROBOT_SDF_HPP_
#define CHAINSDF_ROBOT_SDF_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "chainsdf/fit.hpp"
#include "chainsdf/geometry.hpp"
#include "chainsdf/kinematics.hpp"

namespace chainsdf::robotsdf {

/// One link's signed distance field: weights over the tensor-product
/// Bernstein basis, in the link's local frame.
struct BernsteinField {
  basis::BasisConfig cfg;
  VecX weights;

  void validate() const {
    cfg.validate();
    require(weights.size() == cfg.dof(),
            "BernsteinField: weight count must equal N^3");
    require(weights.allFinite(), "BernsteinField: non-finite weights");
  }
};

struct LinkFieldResult {
  double distance = 0.0;
  Vec3 grad = Vec3::Zero();  // with respect to the local point, 1/1 units
};

/// Field evaluation, total over R^3. Inside the domain box the field value
/// and analytic gradient are returned directly. Outside, the query point is
/// projected onto the box and the Euclidean gap is added:
///   d = |p - proj| + <psi(proj), w>,
/// with the gradient taking the Euclidean direction on clamped axes and the
/// interior field gradient on the others.
LinkFieldResult link_field_eval(const BernsteinField& field,
                                const Vec3& p_local);

enum class MinMode { Hard, Soft };

struct QueryOptions {
  MinMode mode = MinMode::Hard;
  double rho = 100.0;          // soft-min sharpness, 1/m
  bool want_grad_q = false;
  Exec exec = Exec::OpenMP;
};

struct QueryResult {
  double distance = 0.0;
  int link_index = -1;   // frame attaining the min
  Vec3 grad_p = Vec3::Zero();
  VecX grad_q;           // empty unless want_grad_q
};

struct ModelMetadata {
  std::string tool_version;
  std::string fit_method;   // "recursive" | "batch"
  std::uint64_t seed = 0;
  std::map<int, std::int64_t> samples_per_link;
};

/// A kinematic chain plus one Bernstein field per attached link: the
/// queryable whole-robot SDF.
struct RobotSdfModel {
  kinematics::KinematicChain chain;
  std::map<int, BernsteinField> link_fields;  // keyed by frame index
  ModelMetadata metadata;

  void validate() const;
};

/// A model anchored somewhere in the world.
struct PosedModel {
  RobotSdfModel model;
  kinematics::Pose base_pose;
};

/// Whole-robot signed distance at world points for configuration q.
/// Per point each link field is evaluated in its own frame and combined by
/// hard min (argmin link reported) or by the smooth min
///   d = -(1/rho) log sum_k exp(-rho d_k).
/// grad_p is the world-frame spatial gradient (softmax-blended in soft mode);
/// grad_q applies the chain rule through the point-frame Jacobians.
std::vector<QueryResult> eval_points(const RobotSdfModel& model, const VecX& q,
                                     const PointMatrix& points,
                                     const QueryOptions& opts = {});

enum class FitMethod { Recursive, Batch };

struct FitRobotConfig {
  int n_per_axis = 8;
  geometry::SamplingConfig sampling;  // per-link sample counts and noise
  fit::FitConfig fit;
  FitMethod method = FitMethod::Recursive;
  /// Domain cube: geometry AABB symmetrized to a cube, grown on each side by
  /// max(margin_fraction * max_extent, margin_min_m).
  double margin_fraction = 0.25;
  double margin_min_m = 0.05;
  std::uint64_t seed = 0;
  Exec exec = Exec::OpenMP;
};

/// Computes each attached link's domain cube from its geometry, samples a
/// training set in the link frame, and fits the field. Links with identical
/// geometry, pose, and config share one fit (the result is identical by
/// determinism). Deterministic per seed.
RobotSdfModel fit_robot(const kinematics::KinematicChain& chain,
                        const FitRobotConfig& cfg);

/// Domain cube rule exposed for tests and tooling.
AxisBox link_domain_cube(const AxisBox& geometry_aabb, double margin_fraction,
                         double margin_min_m);

struct EvalAccuracyConfig {
  int n_configs = 20;
  int n_points = 1000;            // per configuration
  double near_threshold = 0.03;   // m
  double near_fraction = 0.5;     // surface-biased share of points
  double near_sigma = 0.01;       // m, noise around the surface
  std::uint64_t seed = 0;
  MinMode mode = MinMode::Hard;
  Exec exec = Exec::OpenMP;
};

struct AccuracyEvalResult {
  geometry::AccuracyReport report;
  double ms_per_kquery = 0.0;
  std::int64_t total_queries = 0;
};

/// Table-style protocol: random in-limit configurations, points sampled
/// around the posed robot (surface-biased plus uniform inside the union of
/// posed domain boxes), truth from the attached oracle geometry, prediction
/// from eval_points.
AccuracyEvalResult evaluate_accuracy(const RobotSdfModel& model,
                                     const EvalAccuracyConfig& cfg);

/// Dense distance grid over `box` at configuration q, written to the
/// versioned grid format (float32 payload, x index slowest). Grids larger
/// than 1e8 cells are rejected.
void export_level_set_grid(const RobotSdfModel& model, const VecX& q,
                           const AxisBox& box, const std::array<int, 3>& res,
                           const std::string& path,
                           const QueryOptions& opts = {});

struct LevelSetGrid {
  AxisBox box;
  std::array<int, 3> resolution;
  std::vector<float> values;  // x slowest, z fastest
};

LevelSetGrid load_level_set_grid(const std::string& path);

// Model file: versioned JSON header plus base64 little-endian float64
// weights per link. Round-trips byte-identically.
void save_model(const RobotSdfModel& model, const std::string& path);
RobotSdfModel load_model(const std::string& path);
std::string model_to_string(const RobotSdfModel& model);
RobotSdfModel model_from_string(const std::string& text,
                                const std::string& base_dir = ".");

}  // namespace chainsdf::robotsdf

#endif  // CHAINSDF_ROBOT_SDF_HPP_
