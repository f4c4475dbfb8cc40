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

#include "chainsdf/robot_sdf.hpp"

#include <doctest.h>

#include <fstream>

#include "chainsdf/fixtures.hpp"
#include "test_util.hpp"

using namespace chainsdf;
using namespace chainsdf::robotsdf;

namespace {

// Single sphere-link robot fitted at N=8 on one revolute joint.
const RobotSdfModel& sphere_model() {
  static const RobotSdfModel model = [] {
    kinematics::KinematicChain chain;
    chain.rows.push_back(kinematics::DhRow{});
    chain.q_min = VecX::Constant(1, -M_PI);
    chain.q_max = VecX::Constant(1, M_PI);
    kinematics::Attachment att;
    att.frame = 1;
    att.shape = geometry::Sphere{Vec3(0.1, 0.0, 0.05), 0.12};
    chain.attachments.push_back(att);

    FitRobotConfig cfg;
    cfg.n_per_axis = 8;
    cfg.sampling.n_surface = 16000;
    cfg.sampling.n_uniform = 2000;
    cfg.fit.batch_size = 1024;
    cfg.seed = 3;
    return fit_robot(chain, cfg);
  }();
  return model;
}

double sphere_oracle(const Vec3& p_local) {
  return (p_local - Vec3(0.1, 0.0, 0.05)).norm() - 0.12;
}

}  // namespace

TEST_SUITE("robotsdf") {

TEST_CASE("link_field_eval reproduces a fitted sphere") {
  const auto& field = sphere_model().link_fields.at(1);
  const auto center = link_field_eval(field, Vec3(0.1, 0.0, 0.05));
  CHECK(center.distance == doctest::Approx(-0.12).epsilon(0.02));

  // Interior gradient is near-unit away from the center.
  const auto side = link_field_eval(field, Vec3(0.28, 0.0, 0.05));
  CHECK(side.distance == doctest::Approx(0.06).epsilon(0.05));
  CHECK(side.grad.norm() == doctest::Approx(1.0).epsilon(0.05));
  CHECK(side.grad.normalized().dot(Vec3::UnitX()) ==
        doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("link_field_eval exterior rule") {
  const auto& field = sphere_model().link_fields.at(1);
  const AxisBox& box = field.cfg.domain;

  // Far along one axis: the Euclidean gap is a lower bound.
  const Vec3 outside = box.max + Vec3(0.5, 0.0, 0.0);
  const auto far = link_field_eval(field, outside);
  CHECK(far.distance >= 0.5 - 1e-9);
  CHECK(far.grad[0] == doctest::Approx(1.0));

  // C0 continuity across a face.
  const Vec3 face(box.max[0], box.center()[1], box.center()[2]);
  const auto inside = link_field_eval(field, face - Vec3(1e-6, 0, 0));
  const auto beyond = link_field_eval(field, face + Vec3(1e-6, 0, 0));
  CHECK(std::abs(inside.distance - beyond.distance) <= 1e-4);

  // The exterior value dominates the oracle only through the field error.
  CHECK(far.distance ==
        doctest::Approx(0.5 + link_field_eval(field, box.max).distance)
            .epsilon(1e-12));
}

TEST_CASE("eval_points on a single link equals link_field_eval exactly") {
  const auto& model = sphere_model();
  VecX q(1);
  q << 0.0;
  PointMatrix pts(3, 3);
  pts << 0.1, 0.0, 0.05, 0.3, 0.1, 0.0, 0.9, 0.9, 0.9;
  const auto results = eval_points(model, q, pts);
  for (int i = 0; i < 3; ++i) {
    const auto direct =
        link_field_eval(model.link_fields.at(1), pts.row(i).transpose());
    CHECK(results[i].distance == direct.distance);  // bit-level
    CHECK(results[i].link_index == 1);
    CHECK(results[i].grad_p == direct.grad);
  }
}

TEST_CASE("hard-min dominance and reported link") {
  const auto& model = testutil::planar_model_n8();
  Rng rng(9);
  VecX q(3);
  for (int j = 0; j < 3; ++j) q[j] = rng.uniform(-1.5, 1.5);
  const auto frames = kinematics::forward_kinematics(model.chain, q);

  PointMatrix pts(50, 3);
  for (int i = 0; i < 50; ++i)
    pts.row(i) = (rng.normal3() * 0.4).transpose();
  const auto results = eval_points(model, q, pts);

  for (int i = 0; i < 50; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [frame, field] : model.link_fields) {
      const double dk =
          link_field_eval(field,
                          frames[frame].apply_inverse(pts.row(i).transpose()))
              .distance;
      CHECK(results[i].distance <= dk + 1e-12);
      best = std::min(best, dk);
    }
    CHECK(results[i].distance == doctest::Approx(best).epsilon(1e-12));
    // Equality holds at the reported link.
    const auto& winner = model.link_fields.at(results[i].link_index);
    const double dwin =
        link_field_eval(
            winner,
            frames[results[i].link_index].apply_inverse(pts.row(i).transpose()))
            .distance;
    CHECK(results[i].distance == dwin);
  }
}

TEST_CASE("planar fixture matches the capsule-union oracle") {
  const auto& model = testutil::planar_model_n8();
  Rng rng(19);
  double abs_err = 0.0;
  int count = 0;
  for (int c = 0; c < 4; ++c) {
    VecX q(3);
    for (int j = 0; j < 3; ++j) q[j] = rng.uniform(-1.5, 1.5);
    const auto frames = kinematics::forward_kinematics(model.chain, q);

    PointMatrix pts(50, 3);
    for (int i = 0; i < 50; ++i) {
      // Near-surface world points: pick a link, sample its capsule.
      const int frame = 1 + int(rng.uniform_index(3));
      const auto& att = model.chain.attachments[frame - 1];
      Rng srng = rng.stream(i);
      const Vec3 local = geometry::sample_shape_surface(att.shape, srng) +
                         0.01 * srng.normal3();
      pts.row(i) = frames[frame].apply(att.local_pose.apply(local)).transpose();
    }
    const auto results = eval_points(model, q, pts);
    for (int i = 0; i < 50; ++i) {
      abs_err += std::abs(results[i].distance -
                          testutil::planar_oracle_sdf(model.chain, q,
                                                      pts.row(i).transpose()));
      ++count;
    }
  }
  CHECK(abs_err / count <= 2e-3);
}

TEST_CASE("soft-min brackets the hard min and converges monotonically") {
  const auto& model = testutil::planar_model_n8();
  const double ln_k = std::log(double(model.link_fields.size()));
  Rng rng(29);
  for (int trial = 0; trial < 200; ++trial) {
    VecX q(3);
    for (int j = 0; j < 3; ++j) q[j] = rng.uniform(-2.0, 2.0);
    PointMatrix pt(1, 3);
    pt.row(0) = (rng.normal3() * 0.5).transpose();

    const double hard = eval_points(model, q, pt)[0].distance;
    double prev = -std::numeric_limits<double>::infinity();
    for (double rho : {1e2, 1e3, 1e4}) {
      QueryOptions opts;
      opts.mode = MinMode::Soft;
      opts.rho = rho;
      const double soft = eval_points(model, q, pt, opts)[0].distance;
      CHECK(soft <= hard + 1e-12);
      CHECK(soft >= hard - ln_k / rho - 1e-12);
      CHECK(soft >= prev - 1e-12);  // monotone approach from below
      prev = soft;
    }
  }
}

TEST_CASE("grad_p and grad_q match finite differences in soft-min mode") {
  const auto& model = testutil::planar_model_n8();
  Rng rng(39);
  QueryOptions opts;
  opts.mode = MinMode::Soft;
  opts.want_grad_q = true;

  double worst_p = 0.0, worst_q = 0.0;
  int used = 0;
  for (int trial = 0; trial < 200 && used < 60; ++trial) {
    VecX q(3);
    for (int j = 0; j < 3; ++j) q[j] = rng.uniform(-1.5, 1.5);
    const auto frames = kinematics::forward_kinematics(model.chain, q);
    const int frame = 1 + int(rng.uniform_index(3));
    const Vec3 local = rng.uniform_in_box(
        model.link_fields.at(frame).cfg.domain.expanded(-0.02));
    const Vec3 p = frames[frame].apply(local);

    // Keep the FD stencil away from every domain-box face (the exterior
    // blend is only C0 there).
    bool clear = true;
    for (const auto& [f, field] : model.link_fields) {
      const Vec3 pl = frames[f].apply_inverse(p);
      for (int axis = 0; axis < 3; ++axis) {
        const double lo = std::abs(pl[axis] - field.cfg.domain.min[axis]);
        const double hi = std::abs(pl[axis] - field.cfg.domain.max[axis]);
        if (std::min(lo, hi) < 1e-4) clear = false;
      }
    }
    if (!clear) continue;
    ++used;

    PointMatrix pt(1, 3);
    pt.row(0) = p.transpose();
    const auto res = eval_points(model, q, pt, opts)[0];

    const double h = 1e-6;
    for (int axis = 0; axis < 3; ++axis) {
      PointMatrix pp = pt, pm = pt;
      pp(0, axis) += h;
      pm(0, axis) -= h;
      const double fd = (eval_points(model, q, pp, opts)[0].distance -
                         eval_points(model, q, pm, opts)[0].distance) /
                        (2 * h);
      worst_p = std::max(worst_p,
                         std::abs(res.grad_p[axis] - fd) / std::max(1.0, std::abs(fd)));
    }
    for (int j = 0; j < 3; ++j) {
      VecX qp = q, qm = q;
      qp[j] += h;
      qm[j] -= h;
      const double fd = (eval_points(model, qp, pt, opts)[0].distance -
                         eval_points(model, qm, pt, opts)[0].distance) /
                        (2 * h);
      worst_q = std::max(worst_q,
                         std::abs(res.grad_q[j] - fd) / std::max(1.0, std::abs(fd)));
    }
  }
  REQUIRE(used >= 40);
  CHECK(worst_p <= 1e-4);
  CHECK(worst_q <= 1e-4);
}

TEST_CASE("fit_robot is deterministic and shares identical-link fits") {
  FitRobotConfig cfg;
  cfg.n_per_axis = 4;
  cfg.sampling.n_surface = 3000;
  cfg.sampling.n_uniform = 400;
  cfg.fit.batch_size = 1024;
  cfg.seed = 11;
  const auto chain = fixtures::planar_three_link();
  const auto a = fit_robot(chain, cfg);
  const auto b = fit_robot(chain, cfg);
  for (const auto& [frame, field] : a.link_fields) {
    CHECK(field.weights == b.link_fields.at(frame).weights);
    // Identical links share identical weights.
    CHECK(field.weights == a.link_fields.at(1).weights);
  }

  cfg.seed = 12;
  const auto c = fit_robot(chain, cfg);
  CHECK(c.link_fields.at(1).weights != a.link_fields.at(1).weights);
}

TEST_CASE("finer basis improves the fit") {
  // N=8 strictly better than N=4 on the same capsule link (held-out MAE).
  kinematics::KinematicChain chain;
  chain.rows.push_back(kinematics::DhRow{});
  chain.q_min = VecX::Constant(1, -1);
  chain.q_max = VecX::Constant(1, 1);
  kinematics::Attachment att;
  att.frame = 1;
  att.shape = geometry::Capsule{Vec3(-0.3, 0, 0), Vec3::Zero(), 0.06};
  chain.attachments.push_back(att);

  FitRobotConfig cfg;
  cfg.sampling.n_surface = 9000;
  cfg.sampling.n_uniform = 1000;
  cfg.fit.batch_size = 1024;
  cfg.seed = 13;

  auto held_out_mae = [&](const RobotSdfModel& model) {
    Rng rng(14);
    const auto& field = model.link_fields.at(1);
    double err = 0.0;
    const int count = 500;
    for (int i = 0; i < count; ++i) {
      Vec3 p = geometry::sample_primitive_surface(
                   geometry::Primitive(geometry::Capsule{Vec3(-0.3, 0, 0),
                                                         Vec3::Zero(), 0.06}),
                   rng) +
               0.005 * rng.normal3();
      p = field.cfg.domain.clamp(p);
      const double truth = geometry::primitive_sdf(
          geometry::Capsule{Vec3(-0.3, 0, 0), Vec3::Zero(), 0.06}, p);
      err += std::abs(link_field_eval(field, p).distance - truth);
    }
    return err / count;
  };

  cfg.n_per_axis = 4;
  const double mae4 = held_out_mae(fit_robot(chain, cfg));
  cfg.n_per_axis = 8;
  const double mae8 = held_out_mae(fit_robot(chain, cfg));
  CHECK(mae8 < mae4);
  CHECK(mae8 <= 2e-3);
}

TEST_CASE("evaluate_accuracy on the planar fixture") {
  EvalAccuracyConfig cfg;
  cfg.n_configs = 5;
  cfg.n_points = 400;
  cfg.seed = 15;
  const auto result = evaluate_accuracy(testutil::planar_model_n8(), cfg);
  REQUIRE(result.report.near.has_value());
  REQUIRE(result.report.far.has_value());
  CHECK(result.report.all.mae <= 3e-3);
  CHECK(result.total_queries == 2000);
  CHECK(result.ms_per_kquery > 0.0);
}

TEST_CASE("level-set grid export") {
  const auto& model = sphere_model();
  VecX q(1);
  q << 0.3;
  const AxisBox box = model.link_fields.at(1).cfg.domain;
  const std::string path = testutil::temp_path("sphere.grid");

  export_level_set_grid(model, q, box, {2, 2, 2}, path);
  const auto grid = load_level_set_grid(path);
  REQUIRE(grid.values.size() == 8);
  // Corner samples equal direct evaluations.
  int idx = 0;
  for (int ix = 0; ix < 2; ++ix)
    for (int iy = 0; iy < 2; ++iy)
      for (int iz = 0; iz < 2; ++iz, ++idx) {
        PointMatrix pt(1, 3);
        pt.row(0) = Vec3(ix ? box.max[0] : box.min[0],
                         iy ? box.max[1] : box.min[1],
                         iz ? box.max[2] : box.min[2])
                        .transpose();
        CHECK(grid.values[idx] ==
              float(eval_points(model, q, pt)[0].distance));
      }

  // Byte-identical reruns.
  const std::string path2 = testutil::temp_path("sphere2.grid");
  export_level_set_grid(model, q, box, {2, 2, 2}, path2);
  std::ifstream a(path, std::ios::binary), b(path2, std::ios::binary);
  const std::string sa((std::istreambuf_iterator<char>(a)),
                       std::istreambuf_iterator<char>());
  const std::string sb((std::istreambuf_iterator<char>(b)),
                       std::istreambuf_iterator<char>());
  CHECK(sa == sb);

  // Sign changes straddle the analytic sphere within one cell.
  const std::string path3 = testutil::temp_path("sphere3.grid");
  export_level_set_grid(model, q, box, {24, 24, 24}, path3);
  const auto dense = load_level_set_grid(path3);
  const Vec3 step = box.extents().cwiseQuotient(Vec3::Constant(23.0));
  const auto pose = kinematics::forward_kinematics(model.chain, q)[1];
  auto value = [&](int ix, int iy, int iz) {
    return dense.values[(ix * 24 + iy) * 24 + iz];
  };
  auto node = [&](int ix, int iy, int iz) {
    return Vec3(box.min[0] + step[0] * ix, box.min[1] + step[1] * iy,
                box.min[2] + step[2] * iz);
  };
  const double cell_diag = step.norm();
  for (int ix = 0; ix + 1 < 24; ++ix)
    for (int iy = 0; iy < 24; ++iy)
      for (int iz = 0; iz < 24; ++iz)
        if (value(ix, iy, iz) * value(ix + 1, iy, iz) < 0.0f) {
          const double oracle =
              sphere_oracle(pose.apply_inverse(node(ix, iy, iz)));
          CHECK(std::abs(oracle) <= cell_diag + 2e-3);
        }

  std::array<int, 3> bad = {1, 2, 2};
  CHECK_THROWS_AS(export_level_set_grid(model, q, box, bad, path),
                  std::invalid_argument);
  std::array<int, 3> huge = {1000, 1000, 1000};
  CHECK_THROWS_AS(export_level_set_grid(model, q, box, huge, path),
                  std::invalid_argument);
}

TEST_CASE("model file round trip") {
  const auto& model = testutil::planar_model_n8();
  const std::string path = testutil::temp_path("planar_model.json");
  save_model(model, path);
  const auto loaded = load_model(path);

  for (const auto& [frame, field] : model.link_fields) {
    CHECK(loaded.link_fields.at(frame).weights == field.weights);
    CHECK(loaded.link_fields.at(frame).cfg.n_per_axis == field.cfg.n_per_axis);
  }
  CHECK(loaded.metadata.seed == model.metadata.seed);

  // Write -> read -> write is byte-identical.
  const std::string path2 = testutil::temp_path("planar_model2.json");
  save_model(loaded, path2);
  std::ifstream a(path, std::ios::binary), b(path2, std::ios::binary);
  const std::string sa((std::istreambuf_iterator<char>(a)),
                       std::istreambuf_iterator<char>());
  const std::string sb((std::istreambuf_iterator<char>(b)),
                       std::istreambuf_iterator<char>());
  CHECK(sa == sb);

  // Identical queries after the round trip.
  VecX q(3);
  q << 0.4, -0.3, 0.8;
  PointMatrix pts(5, 3);
  Rng rng(16);
  for (int i = 0; i < 5; ++i) pts.row(i) = (rng.normal3() * 0.4).transpose();
  const auto r1 = eval_points(model, q, pts);
  const auto r2 = eval_points(loaded, q, pts);
  for (int i = 0; i < 5; ++i) CHECK(r1[i].distance == r2[i].distance);

  CHECK_THROWS(model_from_string("{}"));
}

TEST_CASE("domain cube rule") {
  AxisBox aabb{Vec3(-0.36, -0.06, -0.06), Vec3(0.06, 0.06, 0.06)};
  const AxisBox cube = link_domain_cube(aabb, 0.25, 0.05);
  const Vec3 ext = cube.extents();
  CHECK(ext[0] == doctest::Approx(ext[1]));
  CHECK(ext[1] == doctest::Approx(ext[2]));
  // 0.42 max extent -> margin 0.105 on each side.
  CHECK(ext[0] == doctest::Approx(0.42 + 2 * 0.105));
  CHECK(cube.contains(aabb.min));
  CHECK(cube.contains(aabb.max));

  // Tiny geometry gets the 5 cm floor.
  AxisBox small{Vec3::Zero(), Vec3::Constant(0.02)};
  const AxisBox scube = link_domain_cube(small, 0.25, 0.05);
  CHECK(scube.extents()[0] == doctest::Approx(0.02 + 2 * 0.05));
}

}  // TEST_SUITE
