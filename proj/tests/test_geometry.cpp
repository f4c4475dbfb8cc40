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

#include <doctest.h>

#include <fstream>

#include "test_util.hpp"

using namespace chainsdf;
using namespace chainsdf::geometry;

namespace {

// Unit cube [0,1]^3 as 12 triangles with outward winding.
TriangleMesh unit_cube_mesh() {
  TriangleMesh mesh;
  for (int c = 0; c < 8; ++c)
    mesh.vertices.push_back(Vec3(c & 1, (c >> 1) & 1, (c >> 2) & 1));
  const int f[12][3] = {{0, 2, 1}, {1, 2, 3},   // z = 0
                        {4, 5, 6}, {5, 7, 6},   // z = 1
                        {0, 1, 4}, {1, 5, 4},   // y = 0
                        {2, 6, 3}, {3, 6, 7},   // y = 1
                        {0, 4, 2}, {2, 4, 6},   // x = 0
                        {1, 3, 5}, {3, 7, 5}};  // x = 1
  for (const auto& tri : f) mesh.triangles.push_back({tri[0], tri[1], tri[2]});
  mesh.finalize();
  return mesh;
}

// Icosphere built by subdividing an icosahedron and projecting to the sphere.
TriangleMesh icosphere(const Vec3& center, double radius, int subdivisions) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {
      {-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi},  {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (auto& v : verts) v.normalize();
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      verts.push_back(((verts[a] + verts[b]) * 0.5).normalized());
      midpoint[key] = int(verts.size()) - 1;
      return int(verts.size()) - 1;
    };
    std::vector<std::array<int, 3>> next;
    for (const auto& tri : faces) {
      const int ab = mid(tri[0], tri[1]);
      const int bc = mid(tri[1], tri[2]);
      const int ca = mid(tri[2], tri[0]);
      next.push_back({tri[0], ab, ca});
      next.push_back({tri[1], bc, ab});
      next.push_back({tri[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }
  TriangleMesh mesh;
  for (const auto& v : verts) mesh.vertices.push_back(center + radius * v);
  mesh.triangles = faces;
  mesh.finalize();
  return mesh;
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("primitive_sdf closed forms") {
  const Primitive sphere = Sphere{Vec3(0.2, -0.1, 0.3), 0.1};
  CHECK(primitive_sdf(sphere, Vec3(0.2, -0.1, 0.3)) == doctest::Approx(-0.1));
  CHECK(primitive_sdf(sphere, Vec3(0.5, -0.1, 0.3)) == doctest::Approx(0.2));

  const Primitive box = BoxShape{Vec3::Zero(), Vec3::Ones()};
  CHECK(primitive_sdf(box, Vec3(2, 0, 0)) == doctest::Approx(1.0));
  CHECK(primitive_sdf(box, Vec3(0, 0, 0)) == doctest::Approx(-1.0));
  CHECK(primitive_sdf(box, Vec3(2, 2, 0)) ==
        doctest::Approx(std::sqrt(2.0)));

  const Primitive cap = Capsule{Vec3(-0.1, 0, 0), Vec3(0.1, 0, 0), 0.05};
  CHECK(primitive_sdf(cap, Vec3(0, 0, 0)) == doctest::Approx(-0.05));
  CHECK(primitive_sdf(cap, Vec3(0.3, 0, 0)) == doctest::Approx(0.15));
  CHECK(primitive_sdf(cap, Vec3(0, 0.2, 0)) == doctest::Approx(0.15));
}

TEST_CASE("primitive oracles: eikonal gradient and sign flip at the surface") {
  const std::vector<Primitive> prims = {
      Sphere{Vec3(0.1, 0.2, -0.1), 0.15},
      Capsule{Vec3(-0.2, 0, 0), Vec3(0.2, 0.1, 0), 0.08},
      BoxShape{Vec3(0, 0, 0.1), Vec3(0.2, 0.15, 0.1)}};
  Rng rng(77);
  for (const auto& prim : prims) {
    validate_primitive(prim);
    for (int trial = 0; trial < 40; ++trial) {
      const Vec3 p = rng.uniform_in_box(
          primitive_aabb(prim).expanded(0.2));
      const double d = primitive_sdf(prim, p);
      if (std::abs(d) < 0.02) continue;  // skip near-surface/medial points
      const double h = 1e-6;
      Vec3 fd;
      for (int axis = 0; axis < 3; ++axis) {
        Vec3 pp = p, pm = p;
        pp[axis] += h;
        pm[axis] -= h;
        fd[axis] =
            (primitive_sdf(prim, pp) - primitive_sdf(prim, pm)) / (2 * h);
      }
      if (std::abs(fd.norm() - 1.0) > 1e-4) continue;  // medial axis nearby
      CHECK(std::abs(fd.norm() - 1.0) <= 1e-4);
      CHECK((primitive_sdf_grad(prim, p) - fd).norm() <= 1e-4);
    }

    // Bisection along random rays locates the zero crossing.
    for (int trial = 0; trial < 10; ++trial) {
      const Vec3 dir = rng.unit_vector();
      const Vec3 center = primitive_aabb(prim).center();
      double lo = 0.0, hi = 2.0;
      REQUIRE(primitive_sdf(prim, center) < 0.0);
      REQUIRE(primitive_sdf(prim, center + hi * dir) > 0.0);
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (primitive_sdf(prim, center + mid * dir) < 0.0 ? lo : hi) = mid;
      }
      const double crossing = 0.5 * (lo + hi);
      CHECK(std::abs(primitive_sdf(prim, center + crossing * dir)) <= 1e-9);
    }
  }
}

TEST_CASE("mesh_sdf on the unit cube") {
  const TriangleMesh cube = unit_cube_mesh();
  CHECK(cube.watertight);
  CHECK(mesh_sdf(cube, Vec3(0.5, 0.5, 0.5)) == doctest::Approx(-0.5));
  CHECK(mesh_sdf(cube, Vec3(1.5, 0.5, 0.5)) == doctest::Approx(0.5));
  CHECK(mesh_sdf(cube, Vec3(0.5, 0.5, 0.9)) == doctest::Approx(-0.1));
}

TEST_CASE("mesh_sdf icosphere agrees with the analytic sphere") {
  const Vec3 center(0.05, -0.02, 0.01);
  const double radius = 0.2;
  const TriangleMesh ball = icosphere(center, radius, 3);  // 1280 triangles
  CHECK(ball.watertight);
  const Primitive sphere = Sphere{center, radius};
  Rng rng(5);
  AxisBox box{center - Vec3::Constant(0.4), center + Vec3::Constant(0.4)};
  for (int trial = 0; trial < 100; ++trial) {
    const Vec3 p = rng.uniform_in_box(box);
    const double truth = primitive_sdf(sphere, p);
    CHECK(std::abs(mesh_sdf(ball, p) - truth) <= 2e-3);
  }
}

TEST_CASE("mesh_sdf nearest-triangle magnitude is exact") {
  const TriangleMesh cube = unit_cube_mesh();
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec3 p = rng.uniform_in_box({Vec3::Constant(-1), Vec3::Constant(2)});
    const double d = mesh_sdf(cube, p);
    // Reference: brute-force closest point over a dense sampling of each face.
    double ref = std::numeric_limits<double>::infinity();
    const int kGrid = 40;
    for (int face = 0; face < 6; ++face) {
      const int axis = face / 2;
      const double level = face % 2;
      for (int i = 0; i <= kGrid; ++i)
        for (int j = 0; j <= kGrid; ++j) {
          Vec3 s;
          s[axis] = level;
          s[(axis + 1) % 3] = double(i) / kGrid;
          s[(axis + 2) % 3] = double(j) / kGrid;
          ref = std::min(ref, (p - s).norm());
        }
    }
    CHECK(std::abs(d) <= ref + 1e-12);
    CHECK(std::abs(d) >= ref - 0.05);  // sampling resolution slack
  }
}

TEST_CASE("sample_training_set basics") {
  const Shape sphere = Sphere{Vec3::Constant(0.5), 0.25};
  AxisBox box{Vec3::Zero(), Vec3::Ones()};

  SamplingConfig cfg;
  cfg.n_surface = 0;
  cfg.n_uniform = 500;
  cfg.seed = 9;
  const auto uniform_only = sample_training_set(sphere, cfg, box);
  CHECK(uniform_only.size() == 500);
  for (const auto& s : uniform_only) {
    CHECK(std::isfinite(s.distance));
    CHECK(std::abs(s.distance) <= box.diagonal());
  }

  cfg.n_surface = 4000;
  cfg.n_uniform = 100;
  cfg.sigma_near = 0.005;
  cfg.sigma_far = 0.05;
  const auto samples = sample_training_set(sphere, cfg, box);
  std::int64_t near = 0;
  for (const auto& s : samples)
    if (std::abs(s.distance) < cfg.sigma_near) ++near;
  CHECK(double(near) / double(samples.size()) >= 0.30);

  // Deterministic per seed.
  const auto again = sample_training_set(sphere, cfg, box);
  REQUIRE(again.size() == samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    CHECK(again[i].position == samples[i].position);
    CHECK(again[i].distance == samples[i].distance);
  }

  AxisBox small{Vec3::Zero(), Vec3::Constant(0.5)};
  CHECK_THROWS_AS(sample_training_set(sphere, cfg, small),
                  std::invalid_argument);
}

TEST_CASE("chamfer_distance definition and properties") {
  PointMatrix a(3, 3), b(3, 3);
  a << 0, 0, 0, 1, 0, 0, 0, 1, 0;
  CHECK(chamfer_distance(a, a) == doctest::Approx(0.0));

  PointMatrix p1(1, 3), p2(1, 3);
  p1 << 0, 0, 0;
  p2 << 0, 0, 0.7;
  CHECK(chamfer_distance(p1, p2) == doctest::Approx(0.7));

  Rng rng(11);
  PointMatrix ca(100, 3), cb(100, 3);
  for (int i = 0; i < 100; ++i) {
    ca.row(i) = rng.normal3().transpose();
    cb.row(i) = rng.normal3().transpose();
  }
  // Quadratic-loop reference (the definition).
  double acc_a = 0.0, acc_b = 0.0;
  for (int i = 0; i < 100; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < 100; ++j)
      best = std::min(best,
                      (ca.row(i) - cb.row(j)).norm());
    acc_a += best;
  }
  for (int j = 0; j < 100; ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 100; ++i)
      best = std::min(best, (ca.row(i) - cb.row(j)).norm());
    acc_b += best;
  }
  const double ref = 0.5 * (acc_a / 100 + acc_b / 100);
  CHECK(chamfer_distance(ca, cb) == doctest::Approx(ref).epsilon(1e-12));
  CHECK(chamfer_distance(ca, cb) == doctest::Approx(chamfer_distance(cb, ca)));
  CHECK(chamfer_distance(ca, cb) >= 0.0);

  PointMatrix empty(0, 3);
  CHECK_THROWS_AS(chamfer_distance(empty, ca), std::invalid_argument);
}

TEST_CASE("accuracy_report partitions and aggregates") {
  VecX truth(6), pred(6);
  truth << 0.01, -0.02, 0.05, 0.2, -0.1, 0.0;
  pred = truth;
  auto rep = accuracy_report(pred, truth, 0.03);
  CHECK(rep.all.mae == doctest::Approx(0.0));
  CHECK(rep.near.has_value());
  CHECK(rep.far.has_value());
  CHECK(rep.near->count == 3);
  CHECK(rep.far->count == 3);

  pred.array() += 0.001;
  rep = accuracy_report(pred, truth, 0.03);
  CHECK(rep.all.mae == doctest::Approx(0.001));
  CHECK(rep.all.rmse == doctest::Approx(0.001));
  CHECK(rep.near->mae == doctest::Approx(0.001));
  CHECK(rep.far->rmse == doctest::Approx(0.001));

  // Hand-recomputed mixed fixture.
  VecX t2(4), p2(4);
  t2 << 0.01, 0.05, -0.01, 0.10;
  p2 << 0.012, 0.04, -0.013, 0.13;
  rep = accuracy_report(p2, t2, 0.03);
  // near errors: {0.002, -0.003}; far errors: {-0.01, 0.03}
  CHECK(rep.near->mae == doctest::Approx(0.0025));
  CHECK(rep.near->rmse ==
        doctest::Approx(std::sqrt((0.002 * 0.002 + 0.003 * 0.003) / 2)));
  CHECK(rep.far->mae == doctest::Approx(0.02));
  CHECK(rep.far->rmse ==
        doctest::Approx(std::sqrt((0.0001 + 0.0009) / 2)));
  CHECK(rep.partition_mean->mae ==
        doctest::Approx(0.5 * (rep.near->mae + rep.far->mae)));

  // Empty partition reported absent.
  VecX t3(2), p3(2);
  t3 << 0.2, 0.4;
  p3 << 0.2, 0.4;
  rep = accuracy_report(p3, t3, 0.03);
  CHECK(!rep.near.has_value());
  CHECK(rep.far.has_value());
}

TEST_CASE("obj and stl ingestion") {
  const std::string obj_path = testutil::temp_path("cube.obj");
  {
    std::ofstream out(obj_path);
    out << "# unit cube\n";
    const TriangleMesh cube = unit_cube_mesh();
    for (const auto& v : cube.vertices)
      out << "v " << v[0] << " " << v[1] << " " << v[2] << "\n";
    for (const auto& t : cube.triangles)
      out << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
  }
  const TriangleMesh loaded = load_obj(obj_path);
  CHECK(loaded.vertices.size() == 8);
  CHECK(loaded.triangles.size() == 12);
  CHECK(loaded.watertight);
  CHECK(mesh_sdf(loaded, Vec3(0.5, 0.5, 0.5)) == doctest::Approx(-0.5));

  // Binary STL of the same cube; vertices are welded on load.
  const std::string stl_path = testutil::temp_path("cube.stl");
  {
    const TriangleMesh cube = unit_cube_mesh();
    std::ofstream out(stl_path, std::ios::binary);
    char header[80] = {0};
    out.write(header, 80);
    const std::uint32_t n = static_cast<std::uint32_t>(cube.triangles.size());
    out.write(reinterpret_cast<const char*>(&n), 4);
    for (size_t t = 0; t < cube.triangles.size(); ++t) {
      float rec[12] = {0};
      for (int k = 0; k < 3; ++k) rec[k] = float(cube.normals[t][k]);
      for (int v = 0; v < 3; ++v)
        for (int k = 0; k < 3; ++k)
          rec[3 + 3 * v + k] = float(cube.vertices[cube.triangles[t][v]][k]);
      out.write(reinterpret_cast<const char*>(rec), sizeof(rec));
      const std::uint16_t attr = 0;
      out.write(reinterpret_cast<const char*>(&attr), 2);
    }
  }
  const TriangleMesh stl = load_stl(stl_path);
  CHECK(stl.vertices.size() == 8);
  CHECK(stl.triangles.size() == 12);
  CHECK(stl.watertight);
  CHECK(mesh_sdf(stl, Vec3(1.5, 0.5, 0.5)) == doctest::Approx(0.5));

  CHECK_THROWS(load_obj(testutil::temp_path("missing.obj")));
  CHECK_THROWS(load_mesh("unsupported.ply"));
}

TEST_CASE("samples csv export") {
  std::vector<SdfSample> samples = {{Vec3(0.25, 0.5, -0.75), 0.125}};
  const std::string path = testutil::temp_path("samples.csv");
  save_samples_csv(samples, path);
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "x,y,z,d");
  CHECK(row == "0.25,0.5,-0.75,0.125");
}

}  // TEST_SUITE
