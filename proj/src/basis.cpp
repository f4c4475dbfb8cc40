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

#include <array>
#include <cmath>

namespace chainsdf::basis {

namespace {

// binomials[n][k] = C(n, k) for n up to kMaxBasisPerAxis-1. Exact in double.
constexpr auto kBinomials = [] {
  std::array<std::array<double, kMaxBasisPerAxis>, kMaxBasisPerAxis> c{};
  for (int n = 0; n < kMaxBasisPerAxis; ++n) {
    c[n][0] = 1.0;
    for (int k = 1; k <= n; ++k)
      c[n][k] = c[n - 1][k - 1] + (k <= n - 1 ? c[n - 1][k] : 0.0);
  }
  return c;
}();

void check_eval_args(double t, int n) {
  require(t >= 0.0 && t <= 1.0, "basis: t must lie in [0, 1]");
  require(n >= 2, "basis: N must be >= 2");
  require(n <= kMaxBasisPerAxis, "basis: N must be <= 32");
}

}  // namespace

namespace detail {

void bernstein_row(double t, int count, double* out) {
  const int degree = count - 1;
  const double u = 1.0 - t;
  // Powers accumulated incrementally; pow(0,0) conventions never arise.
  double tp = 1.0;
  for (int k = 0; k <= degree; ++k) {
    out[k] = kBinomials[degree][k] * tp;
    tp *= t;
  }
  double up = 1.0;
  for (int k = degree; k >= 0; --k) {
    out[k] *= up;
    up *= u;
  }
}

void bernstein_grad_row(double t, int count, double* out) {
  const int degree = count - 1;
  if (degree == 0) {
    out[0] = 0.0;
    return;
  }
  std::array<double, kMaxBasisPerAxis> lower;
  bernstein_row(t, count - 1, lower.data());
  for (int k = 0; k < count; ++k) {
    const double left = (k > 0) ? lower[k - 1] : 0.0;
    const double right = (k < count - 1) ? lower[k] : 0.0;
    out[k] = degree * (left - right);
  }
}

}  // namespace detail

VecX eval_1d(double t, int n) {
  check_eval_args(t, n);
  VecX out(n);
  detail::bernstein_row(t, n, out.data());
  return out;
}

VecX grad_1d(double t, int n) {
  check_eval_args(t, n);
  VecX out(n);
  detail::bernstein_grad_row(t, n, out.data());
  return out;
}

VecX features(const Vec3& p, const BasisConfig& cfg) {
  cfg.validate();
  require(cfg.domain.contains(p),
          "basis::features: point outside the domain box");
  const int n = cfg.n_per_axis;
  const Vec3 t = cfg.normalize(p);

  std::array<double, kMaxBasisPerAxis> a, b, c;
  detail::bernstein_row(t[0], n, a.data());
  detail::bernstein_row(t[1], n, b.data());
  detail::bernstein_row(t[2], n, c.data());

  VecX row(cfg.dof());
  int idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double ab = a[i] * b[j];
      for (int k = 0; k < n; ++k) row[idx++] = ab * c[k];
    }
  return row;
}

Eigen::Matrix<double, 3, Eigen::Dynamic> features_grad(const Vec3& p,
                                                       const BasisConfig& cfg) {
  cfg.validate();
  require(cfg.domain.contains(p),
          "basis::features_grad: point outside the domain box");
  const int n = cfg.n_per_axis;
  const Vec3 t = cfg.normalize(p);
  const Vec3 inv_ext = (cfg.domain.max - cfg.domain.min).cwiseInverse();

  std::array<double, kMaxBasisPerAxis> a, b, c, da, db, dc;
  detail::bernstein_row(t[0], n, a.data());
  detail::bernstein_row(t[1], n, b.data());
  detail::bernstein_row(t[2], n, c.data());
  detail::bernstein_grad_row(t[0], n, da.data());
  detail::bernstein_grad_row(t[1], n, db.data());
  detail::bernstein_grad_row(t[2], n, dc.data());

  Eigen::Matrix<double, 3, Eigen::Dynamic> rows(3, cfg.dof());
  int idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double d1 = da[i] * b[j] * inv_ext[0];
      const double d2 = a[i] * db[j] * inv_ext[1];
      const double d3 = a[i] * b[j] * inv_ext[2];
      for (int k = 0; k < n; ++k) {
        rows(0, idx) = d1 * c[k];
        rows(1, idx) = d2 * c[k];
        rows(2, idx) = d3 * dc[k];
        ++idx;
      }
    }
  return rows;
}

MatX feature_matrix(const PointMatrix& points, const BasisConfig& cfg,
                    Exec exec) {
  cfg.validate();
  const auto t = static_cast<std::int64_t>(points.rows());
  MatX psi(t, cfg.dof());
  parallel_for(t, exec, [&](std::int64_t r) {
    psi.row(r) = features(points.row(r).transpose(), cfg).transpose();
  });
  return psi;
}

}  // namespace chainsdf::basis
