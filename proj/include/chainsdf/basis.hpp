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

#ifndef CHAINSDF_BASIS_HPP_
#define CHAINSDF_BASIS_HPP_

#include "chainsdf/core.hpp"
#include "chainsdf/parallel.hpp"

namespace chainsdf::basis {

/// Largest supported basis count per axis. Binomial coefficients are
/// tabulated up to this degree; beyond it C(N-1,n) loses exactness in double.
inline constexpr int kMaxBasisPerAxis = 32;

/// Tensor-product Bernstein basis over an axis-aligned domain box.
///
/// Feature vectors have length N^3 and are flattened with axis 1 slowest and
/// axis 3 fastest: entry (n1, n2, n3) lives at index (n1*N + n2)*N + n3.
/// This ordering is part of the model file format.
struct BasisConfig {
  int n_per_axis = 8;
  AxisBox domain;

  void validate() const {
    require(n_per_axis >= 2, "BasisConfig: n_per_axis must be >= 2");
    require(n_per_axis <= kMaxBasisPerAxis,
            "BasisConfig: n_per_axis must be <= 32");
    domain.validate();
  }

  /// Number of tensor-product features, N^3.
  int dof() const {
    return n_per_axis * n_per_axis * n_per_axis;
  }

  /// Normalized coordinates t in [0,1]^3 for a point inside the domain.
  Vec3 normalize(const Vec3& p) const {
    return (p - domain.min).cwiseQuotient(domain.max - domain.min);
  }

  int flat_index(int n1, int n2, int n3) const {
    return (n1 * n_per_axis + n2) * n_per_axis + n3;
  }
};

/// 1-D Bernstein basis of degree N-1 at normalized t: element n is
/// C(N-1,n) t^n (1-t)^(N-1-n). Entries are non-negative and sum to 1.
VecX eval_1d(double t, int n);

/// Analytic derivative of eval_1d with respect to t. Entries sum to 0.
/// Evaluated through the lowered-degree recurrence so the endpoints t=0,1
/// are exact (the closed form is 0^0-ambiguous there).
VecX grad_1d(double t, int n);

/// Tensor-product feature row psi(p), length N^3, for a point inside the
/// domain. Entries sum to 1.
VecX features(const Vec3& p, const BasisConfig& cfg);

/// Spatial gradient of the feature row: row i is d(psi)/dx_i in 1/meters
/// (the chain factor 1/(max_i - min_i) is included).
Eigen::Matrix<double, 3, Eigen::Dynamic> features_grad(const Vec3& p,
                                                       const BasisConfig& cfg);

/// Stacks feature rows for T points into a T x N^3 matrix.
MatX feature_matrix(const PointMatrix& points, const BasisConfig& cfg,
                    Exec exec = Exec::OpenMP);

namespace detail {

/// Bernstein row of `count` basis functions (degree count-1), count >= 1.
/// Internal: no count >= 2 precondition, used by the derivative recurrence.
void bernstein_row(double t, int count, double* out);

/// Derivative row via d(phi_n^{N-1}) = (N-1) (phi_{n-1}^{N-2} - phi_n^{N-2}).
void bernstein_grad_row(double t, int count, double* out);

}  // namespace detail

}  // namespace chainsdf::basis

#endif  // CHAINSDF_BASIS_HPP_
