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

#ifndef CHAINSDF_FIT_HPP_
#define CHAINSDF_FIT_HPP_

#include <cstdint>
#include <optional>

#include "chainsdf/basis.hpp"
#include "chainsdf/core.hpp"
#include "chainsdf/parallel.hpp"

namespace chainsdf::fit {

struct FitConfig {
  double lambda = 1e-2;     // ridge scalar; also Algorithm-style B0 = (1/lambda) I
  int batch_size = 4096;    // samples per recursive update
  std::optional<VecX> w_init;  // defaults to zero

  void validate() const {
    require(lambda > 0.0, "FitConfig: lambda must be positive");
    require(batch_size >= 1, "FitConfig: batch_size must be >= 1");
  }
};

/// Recursive-regression state. b_matrix tracks (Psi^T Psi + lambda I)^{-1};
/// it stays symmetric positive definite across updates.
struct RlsState {
  basis::BasisConfig cfg;
  MatX b_matrix;
  VecX weights;
  std::int64_t n_samples_seen = 0;
};

/// Ridge regression toward w_init:
///   w* = (Psi^T Psi + lambda I)^{-1} (Psi^T f + lambda w_init).
/// Deterministic for fixed inputs and execution policy.
VecX fit_batch(const PointMatrix& points, const VecX& distances,
               const basis::BasisConfig& cfg, const FitConfig& fit_cfg,
               Exec exec = Exec::OpenMP);

RlsState rls_init(const basis::BasisConfig& cfg, const FitConfig& fit_cfg);

/// One Kalman-gain mini-batch update:
///   K = B Psi~^T (I + Psi~ B Psi~^T)^{-1},  B <- B - K Psi~ B,
///   w <- w + K (f~ - Psi~ w).
/// The m x m inner solve uses an LLT factorization; B is re-symmetrized.
void rls_update(RlsState& state, const PointMatrix& batch_points,
                const VecX& batch_distances, Exec exec = Exec::OpenMP);

/// Runs rls_init + rls_update over consecutive mini-batches of
/// fit_cfg.batch_size. Equivalent to fit_batch on the full set.
VecX fit_recursive(const PointMatrix& points, const VecX& distances,
                   const basis::BasisConfig& cfg, const FitConfig& fit_cfg,
                   Exec exec = Exec::OpenMP);

namespace detail {

/// Deterministic parallel accumulation of G += Psi^T Psi. Work is split over
/// fixed column panels so the result does not depend on thread count.
void accumulate_gram(MatX& gram, const MatX& psi, Exec exec);

}  // namespace detail

}  // namespace chainsdf::fit

#endif  // CHAINSDF_FIT_HPP_
