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

#include "chainsdf/basis.hpp"

#include <doctest.h>

#include "test_util.hpp"

using namespace chainsdf;
using basis::BasisConfig;

namespace {

BasisConfig skewed_config(int n) {
  BasisConfig cfg;
  cfg.n_per_axis = n;
  cfg.domain.min = Vec3(-0.2, 0.1, -0.3);
  cfg.domain.max = Vec3(0.4, 0.5, 0.6);
  return cfg;
}

}  // namespace

TEST_SUITE("basis") {

TEST_CASE("eval_1d endpoint interpolation") {
  const VecX at0 = basis::eval_1d(0.0, 4);
  CHECK(at0[0] == doctest::Approx(1.0).epsilon(1e-15));
  for (int i = 1; i < 4; ++i) CHECK(at0[i] == 0.0);

  const VecX at1 = basis::eval_1d(1.0, 4);
  CHECK(at1[3] == doctest::Approx(1.0).epsilon(1e-15));
  for (int i = 0; i < 3; ++i) CHECK(at1[i] == 0.0);

  const VecX mid = basis::eval_1d(0.5, 2);
  CHECK(mid[0] == doctest::Approx(0.5));
  CHECK(mid[1] == doctest::Approx(0.5));
}

TEST_CASE("eval_1d partition of unity and non-negativity") {
  Rng rng(101);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = 2 + int(rng.uniform_index(31));
    const double t = rng.uniform();
    const VecX row = basis::eval_1d(t, n);
    CHECK(std::abs(row.sum() - 1.0) <= 1e-12);
    CHECK(row.minCoeff() >= 0.0);
  }
}

TEST_CASE("grad_1d analytic derivatives") {
  // N=2 basis is {1-t, t}.
  for (double t : {0.0, 0.3, 1.0}) {
    const VecX g = basis::grad_1d(t, 2);
    CHECK(g[0] == doctest::Approx(-1.0));
    CHECK(g[1] == doctest::Approx(1.0));
  }

  // Endpoint value via the lowered-degree recurrence.
  const VecX g0 = basis::grad_1d(0.0, 3);
  CHECK(g0[0] == doctest::Approx(-2.0));
  CHECK(g0[1] == doctest::Approx(2.0));
  CHECK(g0[2] == doctest::Approx(0.0));
}

TEST_CASE("grad_1d matches central finite differences") {
  for (int n : {2, 3, 5, 12, 32}) {
    Rng rng(200 + n);
    for (int trial = 0; trial < 50; ++trial) {
      const double t = rng.uniform(0.01, 0.99);
      const VecX g = basis::grad_1d(t, n);
      const double h = 1e-6;
      const VecX fd = (basis::eval_1d(t + h, n) - basis::eval_1d(t - h, n)) /
                      (2.0 * h);
      CHECK((g - fd).cwiseAbs().maxCoeff() <= 1e-6);
      CHECK(std::abs(g.sum()) <= 1e-10);
    }
  }
  // The spec's point check at t = 0.3, N = 5.
  const VecX g = basis::grad_1d(0.3, 5);
  const double h = 1e-6;
  const VecX fd =
      (basis::eval_1d(0.3 + h, 5) - basis::eval_1d(0.3 - h, 5)) / (2.0 * h);
  CHECK((g - fd).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("features corner placement follows the flattening order") {
  BasisConfig cfg = skewed_config(2);
  const VecX at_min = basis::features(cfg.domain.min, cfg);
  CHECK(at_min[0] == doctest::Approx(1.0));
  CHECK(at_min.sum() == doctest::Approx(1.0));

  // Corner (t1, t2, t3) = (0, 1, 0): the 1 sits at index (0*N + 1)*N + 0.
  const Vec3 corner(cfg.domain.min[0], cfg.domain.max[1], cfg.domain.min[2]);
  const VecX row = basis::features(corner, cfg);
  CHECK(row[cfg.flat_index(0, 1, 0)] == doctest::Approx(1.0));
  for (int i = 0; i < row.size(); ++i)
    if (i != cfg.flat_index(0, 1, 0)) CHECK(row[i] == doctest::Approx(0.0));
}

TEST_CASE("features sums to one on the interior; N=2 center is uniform") {
  BasisConfig cfg = skewed_config(5);
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec3 p = rng.uniform_in_box(cfg.domain);
    CHECK(std::abs(basis::features(p, cfg).sum() - 1.0) <= 1e-12);
  }

  BasisConfig c2 = skewed_config(2);
  const VecX center = basis::features(c2.domain.center(), c2);
  REQUIRE(center.size() == 8);
  for (int i = 0; i < 8; ++i) CHECK(center[i] == doctest::Approx(0.125));
}

TEST_CASE("features_grad rows sum to zero and match finite differences") {
  for (int n : {4, 8, 24}) {
    BasisConfig cfg = skewed_config(n);
    Rng rng(40 + n);
    double worst = 0.0;
    for (int trial = 0; trial < (n == 24 ? 20 : 100); ++trial) {
      // Keep the stencil inside the domain.
      Vec3 p;
      for (int i = 0; i < 3; ++i)
        p[i] = cfg.domain.min[i] +
               (cfg.domain.max[i] - cfg.domain.min[i]) *
                   rng.uniform(0.02, 0.98);
      const auto rows = basis::features_grad(p, cfg);
      for (int axis = 0; axis < 3; ++axis)
        CHECK(std::abs(rows.row(axis).sum()) <= 1e-9);

      const double h = 1e-6;
      for (int axis = 0; axis < 3; ++axis) {
        Vec3 pp = p, pm = p;
        pp[axis] += h;
        pm[axis] -= h;
        const VecX fd =
            (basis::features(pp, cfg) - basis::features(pm, cfg)) / (2.0 * h);
        const double err =
            (rows.row(axis).transpose() - fd).cwiseAbs().maxCoeff() /
            std::max(1.0, fd.cwiseAbs().maxCoeff());
        worst = std::max(worst, err);
      }
    }
    CHECK(worst <= 1e-5);
  }
}

TEST_CASE("features_grad N=2 trilinear pattern at the unit-cube center") {
  BasisConfig cfg;
  cfg.n_per_axis = 2;
  cfg.domain.min = Vec3::Zero();
  cfg.domain.max = Vec3::Ones();
  const auto rows = basis::features_grad(Vec3::Constant(0.5), cfg);
  // d/dx1 of the trilinear basis at the center: -0.25 for n1 = 0 and +0.25
  // for n1 = 1, independent of the trailing indices.
  for (int n1 = 0; n1 < 2; ++n1)
    for (int n2 = 0; n2 < 2; ++n2)
      for (int n3 = 0; n3 < 2; ++n3)
        CHECK(rows(0, cfg.flat_index(n1, n2, n3)) ==
              doctest::Approx(n1 == 0 ? -0.25 : 0.25));
}

TEST_CASE("precondition violations raise invalid_argument") {
  CHECK_THROWS_AS((void)basis::eval_1d(-0.01, 4), std::invalid_argument);
  CHECK_THROWS_AS((void)basis::eval_1d(1.01, 4), std::invalid_argument);
  CHECK_THROWS_AS((void)basis::eval_1d(0.5, 1), std::invalid_argument);
  CHECK_THROWS_AS((void)basis::eval_1d(0.5, 33), std::invalid_argument);
  CHECK_THROWS_AS((void)basis::grad_1d(0.5, 1), std::invalid_argument);

  BasisConfig cfg = skewed_config(4);
  CHECK_THROWS_AS((void)basis::features(Vec3(9, 9, 9), cfg),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)basis::features_grad(Vec3(9, 9, 9), cfg),
                  std::invalid_argument);
  cfg.n_per_axis = 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

}  // TEST_SUITE
