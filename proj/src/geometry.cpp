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

#include "chainsdf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace chainsdf::geometry {

namespace {

constexpr double kDegenerateArea = 1e-12;

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

Vec3 closest_point_on_segment(const Vec3& a, const Vec3& b, const Vec3& p) {
  const Vec3 ab = b - a;
  const double denom = ab.squaredNorm();
  if (denom < 1e-30) return a;
  const double t = clamp01((p - a).dot(ab) / denom);
  return a + t * ab;
}

// Ericson, "Real-Time Collision Detection", 5.1.5.
Vec3 closest_point_on_triangle(const Vec3& a, const Vec3& b, const Vec3& c,
                               const Vec3& p) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return b + w * (c - b);
  }

  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom;
  const double w = vc * denom;
  return a + ab * v + ac * w;
}

// Watertight-ish ray/triangle crossing test (Moller-Trumbore). Returns 1 on
// a forward crossing, 0 on a miss, -1 when the hit is too close to an edge
// or the ray grazes the plane (vote discarded).
int ray_triangle_crossing(const Vec3& origin, const Vec3& dir, const Vec3& a,
                          const Vec3& b, const Vec3& c) {
  constexpr double kEps = 1e-12;
  constexpr double kEdgeTol = 1e-9;
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 pvec = dir.cross(e2);
  const double det = e1.dot(pvec);
  if (std::abs(det) < kEps) return 0;  // parallel
  const double inv_det = 1.0 / det;
  const Vec3 tvec = origin - a;
  const double u = tvec.dot(pvec) * inv_det;
  if (u < -kEdgeTol || u > 1.0 + kEdgeTol) return 0;
  const Vec3 qvec = tvec.cross(e1);
  const double v = dir.dot(qvec) * inv_det;
  if (v < -kEdgeTol || u + v > 1.0 + kEdgeTol) return 0;
  const double t = e2.dot(qvec) * inv_det;
  if (t <= kEps) return 0;
  if (u < kEdgeTol || v < kEdgeTol || u + v > 1.0 - kEdgeTol) return -1;
  return 1;
}

// Fixed irrational-slope ray directions for the parity vote.
const std::array<Vec3, 3> kParityRays = {
    Vec3(0.577350269189626, 0.577350269189626, 0.577350269189626),
    Vec3(-0.262589527771254, 0.902304983535747, 0.341616742645860),
    Vec3(0.715542753364985, -0.302905713167347, 0.629593323275803)};

}  // namespace

void validate_primitive(const Primitive& prim) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Sphere>) {
          require(s.radius > 0.0, "Sphere: radius must be positive");
        } else if constexpr (std::is_same_v<T, Capsule>) {
          require(s.radius > 0.0, "Capsule: radius must be positive");
          require((s.endpoint_a - s.endpoint_b).norm() > 1e-12,
                  "Capsule: endpoints must be distinct");
        } else {
          require((s.half_extents.array() > 0.0).all(),
                  "BoxShape: half_extents must be positive");
        }
      },
      prim);
}

double primitive_sdf(const Primitive& prim, const Vec3& p) {
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Sphere>) {
          return (p - s.center).norm() - s.radius;
        } else if constexpr (std::is_same_v<T, Capsule>) {
          return (p - closest_point_on_segment(s.endpoint_a, s.endpoint_b, p))
                     .norm() -
                 s.radius;
        } else {
          const Vec3 q = (p - s.center).cwiseAbs() - s.half_extents;
          const double outside = q.cwiseMax(0.0).norm();
          const double inside = std::min(q.maxCoeff(), 0.0);
          return outside + inside;
        }
      },
      prim);
}

Vec3 primitive_sdf_grad(const Primitive& prim, const Vec3& p) {
  return std::visit(
      [&](const auto& s) -> Vec3 {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Sphere>) {
          const Vec3 d = p - s.center;
          const double n = d.norm();
          return n > 1e-12 ? Vec3(d / n) : Vec3::UnitX();
        } else if constexpr (std::is_same_v<T, Capsule>) {
          const Vec3 d =
              p - closest_point_on_segment(s.endpoint_a, s.endpoint_b, p);
          const double n = d.norm();
          if (n > 1e-12) return d / n;
          // On the axis: any radial direction is valid.
          const Vec3 axis = (s.endpoint_b - s.endpoint_a).normalized();
          Vec3 radial = axis.cross(Vec3::UnitX());
          if (radial.norm() < 1e-6) radial = axis.cross(Vec3::UnitY());
          return radial.normalized();
        } else {
          const Vec3 rel = p - s.center;
          const Vec3 q = rel.cwiseAbs() - s.half_extents;
          if ((q.array() > 0.0).any()) {
            Vec3 outside = q.cwiseMax(0.0);
            const double n = outside.norm();
            Vec3 g = outside / n;
            for (int i = 0; i < 3; ++i) g[i] *= (rel[i] < 0.0) ? -1.0 : 1.0;
            return g;
          }
          // Inside: gradient points through the nearest face.
          int axis = 0;
          q.maxCoeff(&axis);
          Vec3 g = Vec3::Zero();
          g[axis] = (rel[axis] < 0.0) ? -1.0 : 1.0;
          return g;
        }
      },
      prim);
}

AxisBox primitive_aabb(const Primitive& prim) {
  return std::visit(
      [](const auto& s) -> AxisBox {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Sphere>) {
          return {s.center - Vec3::Constant(s.radius),
                  s.center + Vec3::Constant(s.radius)};
        } else if constexpr (std::is_same_v<T, Capsule>) {
          const Vec3 lo = s.endpoint_a.cwiseMin(s.endpoint_b);
          const Vec3 hi = s.endpoint_a.cwiseMax(s.endpoint_b);
          return {lo - Vec3::Constant(s.radius),
                  hi + Vec3::Constant(s.radius)};
        } else {
          return {s.center - s.half_extents, s.center + s.half_extents};
        }
      },
      prim);
}

double primitive_area(const Primitive& prim) {
  return std::visit(
      [](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Sphere>) {
          return 4.0 * M_PI * s.radius * s.radius;
        } else if constexpr (std::is_same_v<T, Capsule>) {
          const double len = (s.endpoint_b - s.endpoint_a).norm();
          return 2.0 * M_PI * s.radius * len + 4.0 * M_PI * s.radius * s.radius;
        } else {
          const Vec3& h = s.half_extents;
          return 8.0 * (h[0] * h[1] + h[1] * h[2] + h[0] * h[2]);
        }
      },
      prim);
}

Vec3 sample_primitive_surface(const Primitive& prim, Rng& rng) {
  return std::visit(
      [&](const auto& s) -> Vec3 {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Sphere>) {
          return s.center + s.radius * rng.unit_vector();
        } else if constexpr (std::is_same_v<T, Capsule>) {
          const Vec3 axis = s.endpoint_b - s.endpoint_a;
          const double len = axis.norm();
          const Vec3 u = axis / len;
          const double cyl_area = 2.0 * M_PI * s.radius * len;
          const double cap_area = 4.0 * M_PI * s.radius * s.radius;
          if (rng.uniform() * (cyl_area + cap_area) < cyl_area) {
            // Lateral surface.
            const double h = rng.uniform() * len;
            Vec3 radial = rng.unit_vector();
            radial -= radial.dot(u) * u;
            double n = radial.norm();
            while (n < 1e-9) {
              radial = rng.unit_vector();
              radial -= radial.dot(u) * u;
              n = radial.norm();
            }
            return s.endpoint_a + h * u + (s.radius / n) * radial;
          }
          // Hemispherical caps: a uniform sphere direction, attached to the
          // endpoint it points away from.
          const Vec3 dir = rng.unit_vector();
          const Vec3 base = dir.dot(u) >= 0.0 ? s.endpoint_b : s.endpoint_a;
          return base + s.radius * dir;
        } else {
          const Vec3& h = s.half_extents;
          const double ax = h[1] * h[2], ay = h[0] * h[2], az = h[0] * h[1];
          const double pick = rng.uniform() * (ax + ay + az);
          int axis = pick < ax ? 0 : (pick < ax + ay ? 1 : 2);
          const double side = rng.uniform() < 0.5 ? -1.0 : 1.0;
          Vec3 p;
          for (int i = 0; i < 3; ++i) p[i] = rng.uniform(-h[i], h[i]);
          p[axis] = side * h[axis];
          return s.center + p;
        }
      },
      prim);
}

void TriangleMesh::validate() const {
  const int nv = static_cast<int>(vertices.size());
  require(nv >= 3, "TriangleMesh: needs at least 3 vertices");
  require(!triangles.empty(), "TriangleMesh: needs at least one triangle");
  for (const auto& tri : triangles)
    for (int idx : tri)
      require(idx >= 0 && idx < nv, "TriangleMesh: vertex index out of range");
}

void TriangleMesh::finalize() {
  validate();
  std::vector<std::array<int, 3>> kept;
  kept.reserve(triangles.size());
  normals.clear();
  for (const auto& tri : triangles) {
    const Vec3 n = (vertices[tri[1]] - vertices[tri[0]])
                       .cross(vertices[tri[2]] - vertices[tri[0]]);
    const double area2 = n.norm();
    if (0.5 * area2 <= kDegenerateArea) continue;
    kept.push_back(tri);
    normals.push_back(n / area2);
  }
  triangles = std::move(kept);
  require(!triangles.empty(), "TriangleMesh: all triangles degenerate");

  // Watertight heuristic: every undirected edge shared by exactly two
  // triangles.
  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& tri : triangles)
    for (int e = 0; e < 3; ++e) {
      int u = tri[e], v = tri[(e + 1) % 3];
      if (u > v) std::swap(u, v);
      ++edge_count[{u, v}];
    }
  watertight = std::all_of(edge_count.begin(), edge_count.end(),
                           [](const auto& kv) { return kv.second == 2; });
  if (!watertight)
    std::cerr << "[chainsdf] warning: mesh is not watertight; signed "
                 "distances use the pseudonormal fallback\n";
}

double TriangleMesh::total_area() const {
  double area = 0.0;
  for (const auto& tri : triangles)
    area += 0.5 * (vertices[tri[1]] - vertices[tri[0]])
                      .cross(vertices[tri[2]] - vertices[tri[0]])
                      .norm();
  return area;
}

AxisBox TriangleMesh::bounding_box() const {
  Vec3 lo = vertices.front(), hi = vertices.front();
  for (const auto& v : vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return {lo, hi};
}

double mesh_sdf(const TriangleMesh& mesh, const Vec3& p) {
  require(!mesh.triangles.empty(), "mesh_sdf: empty mesh");
  double best_sq = std::numeric_limits<double>::infinity();
  int best_tri = 0;
  for (size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Vec3 q = closest_point_on_triangle(
        mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]], p);
    const double d2 = (p - q).squaredNorm();
    if (d2 < best_sq) {
      best_sq = d2;
      best_tri = static_cast<int>(t);
    }
  }
  const double dist = std::sqrt(best_sq);

  double sign = 1.0;
  if (mesh.watertight) {
    int inside_votes = 0, valid_votes = 0;
    for (const Vec3& dir : kParityRays) {
      int crossings = 0;
      bool valid = true;
      for (const auto& tri : mesh.triangles) {
        const int c = ray_triangle_crossing(p, dir, mesh.vertices[tri[0]],
                                            mesh.vertices[tri[1]],
                                            mesh.vertices[tri[2]]);
        if (c < 0) {
          valid = false;
          break;
        }
        crossings += c;
      }
      if (!valid) continue;
      ++valid_votes;
      if (crossings % 2 == 1) ++inside_votes;
    }
    if (valid_votes > 0) {
      sign = (2 * inside_votes > valid_votes) ? -1.0 : 1.0;
      return sign * dist;
    }
  }
  // Pseudonormal fallback (also the non-watertight path).
  const auto& tri = mesh.triangles[best_tri];
  const Vec3 q = closest_point_on_triangle(
      mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]], p);
  sign = (p - q).dot(mesh.normals[best_tri]) < 0.0 ? -1.0 : 1.0;
  return sign * dist;
}

VecX mesh_sdf_batch(const TriangleMesh& mesh, const PointMatrix& points,
                    Exec exec) {
  VecX out(points.rows());
  parallel_for(points.rows(), exec, [&](std::int64_t i) {
    out[i] = mesh_sdf(mesh, points.row(i).transpose());
  });
  return out;
}

Vec3 sample_mesh_surface(const TriangleMesh& mesh, Rng& rng) {
  // Area-weighted triangle pick, then uniform barycentric point.
  double total = mesh.total_area();
  double pick = rng.uniform() * total;
  size_t chosen = mesh.triangles.size() - 1;
  double acc = 0.0;
  for (size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    acc += 0.5 * (mesh.vertices[tri[1]] - mesh.vertices[tri[0]])
                     .cross(mesh.vertices[tri[2]] - mesh.vertices[tri[0]])
                     .norm();
    if (pick <= acc) {
      chosen = t;
      break;
    }
  }
  const auto& tri = mesh.triangles[chosen];
  double u = rng.uniform(), v = rng.uniform();
  if (u + v > 1.0) {
    u = 1.0 - u;
    v = 1.0 - v;
  }
  return mesh.vertices[tri[0]] +
         u * (mesh.vertices[tri[1]] - mesh.vertices[tri[0]]) +
         v * (mesh.vertices[tri[2]] - mesh.vertices[tri[0]]);
}

double shape_sdf(const Shape& shape, const Vec3& p) {
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, TriangleMesh>) return mesh_sdf(s, p);
        else return primitive_sdf(Primitive(s), p);
      },
      shape);
}

AxisBox shape_aabb(const Shape& shape) {
  return std::visit(
      [](const auto& s) -> AxisBox {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, TriangleMesh>) return s.bounding_box();
        else return primitive_aabb(Primitive(s));
      },
      shape);
}

double shape_area(const Shape& shape) {
  return std::visit(
      [](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, TriangleMesh>) return s.total_area();
        else return primitive_area(Primitive(s));
      },
      shape);
}

Vec3 sample_shape_surface(const Shape& shape, Rng& rng) {
  return std::visit(
      [&](const auto& s) -> Vec3 {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, TriangleMesh>)
          return sample_mesh_surface(s, rng);
        else
          return sample_primitive_surface(Primitive(s), rng);
      },
      shape);
}

std::vector<SdfSample> sample_training_set(const Shape& shape,
                                           const SamplingConfig& cfg,
                                           const AxisBox& box, Exec exec) {
  require(cfg.n_surface >= 0 && cfg.n_uniform >= 0,
          "sample_training_set: counts must be non-negative");
  box.validate();
  const AxisBox shape_box = shape_aabb(shape);
  require(box.contains(shape_box.min) && box.contains(shape_box.max),
          "sample_training_set: box does not contain the shape");

  const std::int64_t total = cfg.n_surface + cfg.n_uniform;
  std::vector<SdfSample> samples(static_cast<size_t>(total));

  // Positions are drawn serially from one stream (cheap); labeling is the
  // parallel part.
  Rng rng = Rng(cfg.seed);
  const std::int64_t n_near = cfg.n_surface / 2;
  for (std::int64_t i = 0; i < cfg.n_surface; ++i) {
    const double sigma = i < n_near ? cfg.sigma_near : cfg.sigma_far;
    const Vec3 p = sample_shape_surface(shape, rng) + sigma * rng.normal3();
    samples[i].position = box.clamp(p);
  }
  for (std::int64_t i = 0; i < cfg.n_uniform; ++i)
    samples[cfg.n_surface + i].position = rng.uniform_in_box(box);

  parallel_for(total, exec, [&](std::int64_t i) {
    samples[i].distance = shape_sdf(shape, samples[i].position);
  });
  return samples;
}

double chamfer_distance(const PointMatrix& set_a, const PointMatrix& set_b,
                        Exec exec) {
  require(set_a.rows() > 0 && set_b.rows() > 0,
          "chamfer_distance: point sets must be nonempty");
  VecX min_a(set_a.rows()), min_b(set_b.rows());
  parallel_for(set_a.rows(), exec, [&](std::int64_t i) {
    const Vec3 p = set_a.row(i).transpose();
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < set_b.rows(); ++j)
      best = std::min(best, (set_b.row(j).transpose() - p).squaredNorm());
    min_a[i] = std::sqrt(best);
  });
  parallel_for(set_b.rows(), exec, [&](std::int64_t j) {
    const Vec3 p = set_b.row(j).transpose();
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < set_a.rows(); ++i)
      best = std::min(best, (set_a.row(i).transpose() - p).squaredNorm());
    min_b[j] = std::sqrt(best);
  });
  // Serial reductions keep the result independent of thread count.
  return 0.5 * (min_a.sum() / double(min_a.size()) +
                min_b.sum() / double(min_b.size()));
}

namespace {

PartitionStats stats_of(const std::vector<double>& errors) {
  PartitionStats s;
  s.count = static_cast<std::int64_t>(errors.size());
  if (errors.empty()) return s;
  double abs_sum = 0.0, sq_sum = 0.0;
  for (double e : errors) {
    abs_sum += std::abs(e);
    sq_sum += e * e;
  }
  s.mae = abs_sum / double(errors.size());
  s.rmse = std::sqrt(sq_sum / double(errors.size()));
  return s;
}

}  // namespace

AccuracyReport accuracy_report(const VecX& predicted, const VecX& truth,
                               double near_threshold) {
  require(predicted.size() == truth.size(),
          "accuracy_report: length mismatch");
  require(predicted.size() > 0, "accuracy_report: empty inputs");
  AccuracyReport rep;
  rep.near_threshold = near_threshold;
  std::vector<double> near_err, far_err, all_err;
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    const double e = predicted[i] - truth[i];
    all_err.push_back(e);
    if (std::abs(truth[i]) < near_threshold)
      near_err.push_back(e);
    else
      far_err.push_back(e);
  }
  rep.all = stats_of(all_err);
  if (!near_err.empty()) rep.near = stats_of(near_err);
  if (!far_err.empty()) rep.far = stats_of(far_err);
  if (rep.near && rep.far) {
    PartitionStats pm;
    pm.mae = 0.5 * (rep.near->mae + rep.far->mae);
    pm.rmse = 0.5 * (rep.near->rmse + rep.far->rmse);
    pm.count = rep.all.count;
    rep.partition_mean = pm;
  }
  return rep;
}

std::string shape_signature(const Shape& shape) {
  char buf[256];
  return std::visit(
      [&](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Sphere>) {
          std::snprintf(buf, sizeof(buf), "sphere:%.17g,%.17g,%.17g;%.17g",
                        s.center[0], s.center[1], s.center[2], s.radius);
          return buf;
        } else if constexpr (std::is_same_v<T, Capsule>) {
          std::snprintf(buf, sizeof(buf),
                        "capsule:%.17g,%.17g,%.17g;%.17g,%.17g,%.17g;%.17g",
                        s.endpoint_a[0], s.endpoint_a[1], s.endpoint_a[2],
                        s.endpoint_b[0], s.endpoint_b[1], s.endpoint_b[2],
                        s.radius);
          return buf;
        } else if constexpr (std::is_same_v<T, BoxShape>) {
          std::snprintf(buf, sizeof(buf),
                        "box:%.17g,%.17g,%.17g;%.17g,%.17g,%.17g", s.center[0],
                        s.center[1], s.center[2], s.half_extents[0],
                        s.half_extents[1], s.half_extents[2]);
          return buf;
        } else {
          // Meshes: digest over the vertex coordinates and triangle indices.
          std::uint64_t h = 1469598103934665603ull;
          auto mix = [&h](const void* data, size_t bytes) {
            const auto* b = static_cast<const unsigned char*>(data);
            for (size_t i = 0; i < bytes; ++i) {
              h ^= b[i];
              h *= 1099511628211ull;
            }
          };
          for (const auto& v : s.vertices) mix(v.data(), 3 * sizeof(double));
          for (const auto& t : s.triangles) mix(t.data(), 3 * sizeof(int));
          std::snprintf(buf, sizeof(buf), "mesh:%zu,%zu,%016llx",
                        s.vertices.size(), s.triangles.size(),
                        static_cast<unsigned long long>(h));
          return buf;
        }
      },
      shape);
}

TriangleMesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_obj: cannot open " + path);
  TriangleMesh mesh;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag)) continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ss >> v[0] >> v[1] >> v[2]))
        throw std::runtime_error("load_obj: bad vertex at line " +
                                 std::to_string(lineno));
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ss >> tok) {
        // Accept "i", "i/j", "i/j/k"; only the vertex index is used.
        idx.push_back(std::stoi(tok.substr(0, tok.find('/'))));
      }
      if (idx.size() != 3)
        throw std::runtime_error(
            "load_obj: non-triangulated face at line " +
            std::to_string(lineno) + " (triangulate the mesh first)");
      std::array<int, 3> tri;
      for (int i = 0; i < 3; ++i) {
        int v = idx[i];
        if (v < 0) v = static_cast<int>(mesh.vertices.size()) + v + 1;
        tri[i] = v - 1;  // 1-based in the file
      }
      mesh.triangles.push_back(tri);
    }
  }
  mesh.finalize();
  return mesh;
}

TriangleMesh load_stl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_stl: cannot open " + path);
  char header[80];
  in.read(header, 80);
  std::uint32_t n_tris = 0;
  in.read(reinterpret_cast<char*>(&n_tris), 4);
  if (!in) throw std::runtime_error("load_stl: truncated header in " + path);

  TriangleMesh mesh;
  // Exact-coordinate vertex welding so shared edges are detected.
  std::map<std::array<float, 3>, int> index_of;
  auto add_vertex = [&](const std::array<float, 3>& v) {
    auto [it, inserted] =
        index_of.try_emplace(v, static_cast<int>(mesh.vertices.size()));
    if (inserted) mesh.vertices.push_back(Vec3(v[0], v[1], v[2]));
    return it->second;
  };

  for (std::uint32_t t = 0; t < n_tris; ++t) {
    float data[12];  // normal + 3 vertices
    in.read(reinterpret_cast<char*>(data), sizeof(data));
    std::uint16_t attr = 0;
    in.read(reinterpret_cast<char*>(&attr), 2);
    if (!in) throw std::runtime_error("load_stl: truncated facet in " + path);
    std::array<int, 3> tri;
    for (int i = 0; i < 3; ++i)
      tri[i] = add_vertex({data[3 + 3 * i], data[4 + 3 * i], data[5 + 3 * i]});
    mesh.triangles.push_back(tri);
  }
  mesh.finalize();
  return mesh;
}

TriangleMesh load_mesh(const std::string& path) {
  const auto dot = path.rfind('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
  if (ext == "obj") return load_obj(path);
  if (ext == "stl") return load_stl(path);
  throw std::runtime_error("load_mesh: unsupported extension ." + ext);
}

void save_samples_csv(const std::vector<SdfSample>& samples,
                      const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("save_samples_csv: cannot open " + path);
  std::fputs("x,y,z,d\n", f);
  for (const auto& s : samples)
    std::fprintf(f, "%.17g,%.17g,%.17g,%.17g\n", s.position[0], s.position[1],
                 s.position[2], s.distance);
  std::fclose(f);
}

}  // namespace chainsdf::geometry
