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

#ifndef CHAINSDF_GEOMETRY_HPP_
#define CHAINSDF_GEOMETRY_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "chainsdf/core.hpp"
#include "chainsdf/parallel.hpp"

namespace chainsdf::geometry {

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 0.1;
};

struct Capsule {
  Vec3 endpoint_a = Vec3::Zero();
  Vec3 endpoint_b = Vec3::UnitX();
  double radius = 0.05;
};

struct BoxShape {
  Vec3 center = Vec3::Zero();
  Vec3 half_extents = Vec3::Constant(0.1);
};

using Primitive = std::variant<Sphere, Capsule, BoxShape>;

/// Triangle mesh, indices into `vertices`. `normals` are per-triangle outward
/// unit normals (recomputed on load from winding order).
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<Vec3> normals;
  bool watertight = false;

  void validate() const;
  /// Recomputes normals, drops degenerate triangles, runs the edge-sharing
  /// watertightness heuristic. Call after filling vertices/triangles.
  void finalize();
  double total_area() const;
  AxisBox bounding_box() const;
};

/// Any supported ground-truth shape.
using Shape = std::variant<Sphere, Capsule, BoxShape, TriangleMesh>;

struct SdfSample {
  Vec3 position;
  double distance;
};

void validate_primitive(const Primitive& prim);

/// Exact analytic signed distance. Negative inside, zero on the surface.
double primitive_sdf(const Primitive& prim, const Vec3& p);

/// Gradient of primitive_sdf (unit away from the medial axis).
Vec3 primitive_sdf_grad(const Primitive& prim, const Vec3& p);

AxisBox primitive_aabb(const Primitive& prim);
double primitive_area(const Primitive& prim);

/// Area-uniform surface point. Deterministic per Rng state.
Vec3 sample_primitive_surface(const Primitive& prim, Rng& rng);

/// Brute-force signed distance to a triangle mesh: exact nearest
/// point-to-triangle magnitude, sign by 3-ray parity majority vote. For
/// non-watertight meshes the sign falls back to the nearest triangle's
/// pseudonormal and a warning is emitted once per mesh.
double mesh_sdf(const TriangleMesh& mesh, const Vec3& p);

/// Batch version, parallel over query points.
VecX mesh_sdf_batch(const TriangleMesh& mesh, const PointMatrix& points,
                    Exec exec = Exec::OpenMP);

Vec3 sample_mesh_surface(const TriangleMesh& mesh, Rng& rng);

// Shape-generic dispatch.
double shape_sdf(const Shape& shape, const Vec3& p);
AxisBox shape_aabb(const Shape& shape);
double shape_area(const Shape& shape);
Vec3 sample_shape_surface(const Shape& shape, Rng& rng);

struct SamplingConfig {
  std::int64_t n_surface = 230400;   // 90% of 2.56e5
  std::int64_t n_uniform = 25600;    // 10% of 2.56e5
  double sigma_near = 0.005;         // m
  double sigma_far = 0.05;           // m
  std::uint64_t seed = 0;
};

/// DeepSDF-style training set: surface points perturbed by Gaussian noise at
/// two scales (first half sigma_near, second half sigma_far) plus uniform
/// box samples, each labeled with the oracle signed distance.
std::vector<SdfSample> sample_training_set(const Shape& shape,
                                           const SamplingConfig& cfg,
                                           const AxisBox& box,
                                           Exec exec = Exec::OpenMP);

/// Symmetric Chamfer distance, meters: half the sum of the two directed mean
/// nearest-neighbor distances. Brute force.
double chamfer_distance(const PointMatrix& set_a, const PointMatrix& set_b,
                        Exec exec = Exec::OpenMP);

struct PartitionStats {
  double mae = 0.0;
  double rmse = 0.0;
  std::int64_t count = 0;
};

/// Near/far error protocol: partition by |truth| < near_threshold.
/// A partition with no points is reported as absent.
struct AccuracyReport {
  std::optional<PartitionStats> near;
  std::optional<PartitionStats> far;
  PartitionStats all;
  /// Mean of the near and far MAE/RMSE (plain average of partitions), when
  /// both partitions exist. `all` is the sample-weighted aggregation.
  std::optional<PartitionStats> partition_mean;
  double near_threshold = 0.03;
};

AccuracyReport accuracy_report(const VecX& predicted, const VecX& truth,
                               double near_threshold = 0.03);

/// Stable textual signature of a shape's geometry (used to share fits
/// between identical links).
std::string shape_signature(const Shape& shape);

// Mesh ingestion: ASCII OBJ (v/f records, 1-based indices, triangulated) and
// binary STL (duplicate vertices welded exactly).
TriangleMesh load_obj(const std::string& path);
TriangleMesh load_stl(const std::string& path);
TriangleMesh load_mesh(const std::string& path);  // dispatch on extension

/// CSV export "x,y,z,d" with header, one sample per row.
void save_samples_csv(const std::vector<SdfSample>& samples,
                      const std::string& path);

}  // namespace chainsdf::geometry

#endif  // CHAINSDF_GEOMETRY_HPP_
