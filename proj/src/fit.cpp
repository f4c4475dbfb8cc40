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

#include "chainsdf/fit.hpp"

#include <algorithm>

namespace chainsdf::fit {

namespace detail {

void accumulate_gram(MatX& gram, const MatX& psi, Exec exec) {
  const Eigen::Index n = gram.rows();
  constexpr Eigen::Index kPanel = 256;
  const Eigen::Index n_panels = (n + kPanel - 1) / kPanel;
  // Each panel owns columns [c0, c1) of the lower triangle; panels are
  // independent, so OpenMP scheduling cannot change the result.
  parallel_for(n_panels, exec, [&](std::int64_t p) {
    const Eigen::Index c0 = p * kPanel;
    const Eigen::Index w = std::min(kPanel, n - c0);
    gram.block(c0, c0, n - c0, w).noalias() +=
        psi.middleCols(c0, n - c0).transpose() * psi.middleCols(c0, w);
  });
}

namespace {

VecX initial_weights(const basis::BasisConfig& cfg, const FitConfig& fit_cfg) {
  if (fit_cfg.w_init) {
    require(fit_cfg.w_init->size() == cfg.dof(),
            "FitConfig: w_init length must equal N^3");
    return *fit_cfg.w_init;
  }
  return VecX::Zero(cfg.dof());
}

}  // namespace

}  // namespace detail

VecX fit_batch(const PointMatrix& points, const VecX& distances,
               const basis::BasisConfig& cfg, const FitConfig& fit_cfg,
               Exec exec) {
  cfg.validate();
  fit_cfg.validate();
  require(points.rows() >= 1, "fit_batch: needs at least one sample");
  require(points.rows() == distances.size(),
          "fit_batch: points/distances length mismatch");
  require(distances.allFinite(), "fit_batch: non-finite distances");

  const Eigen::Index n = cfg.dof();
  const VecX w0 = detail::initial_weights(cfg, fit_cfg);

  MatX gram = MatX::Zero(n, n);
  VecX rhs = fit_cfg.lambda * w0;

  // Feature rows are built chunk by chunk so the T x N^3 matrix never has to
  // exist for large T.
  const Eigen::Index chunk = std::max<Eigen::Index>(fit_cfg.batch_size, 1024);
  for (Eigen::Index start = 0; start < points.rows(); start += chunk) {
    const Eigen::Index m = std::min(chunk, points.rows() - start);
    const MatX psi =
        basis::feature_matrix(points.middleRows(start, m), cfg, exec);
    detail::accumulate_gram(gram, psi, exec);
    rhs.noalias() += psi.transpose() * distances.segment(start, m);
  }
  gram.diagonal().array() += fit_cfg.lambda;

  // accumulate_gram fills the lower triangle; LLT reads only that half.
  Eigen::LLT<Eigen::Ref<MatX>> llt(gram);  // in place; gram is consumed
  require(llt.info() == Eigen::Success,
          "fit_batch: normal equations not positive definite");
  return llt.solve(rhs);
}

RlsState rls_init(const basis::BasisConfig& cfg, const FitConfig& fit_cfg) {
  cfg.validate();
  fit_cfg.validate();
  RlsState state;
  state.cfg = cfg;
  state.b_matrix =
      MatX::Identity(cfg.dof(), cfg.dof()) * (1.0 / fit_cfg.lambda);
  state.weights = detail::initial_weights(cfg, fit_cfg);
  state.n_samples_seen = 0;
  return state;
}

void rls_update(RlsState& state, const PointMatrix& batch_points,
                const VecX& batch_distances, Exec exec) {
  const Eigen::Index m = batch_points.rows();
  require(m >= 1, "rls_update: empty batch");
  require(m == batch_distances.size(),
          "rls_update: points/distances length mismatch");
  require(batch_points.allFinite() && batch_distances.allFinite(),
          "rls_update: non-finite inputs");

  const MatX psi = basis::feature_matrix(batch_points, state.cfg, exec);

  const MatX bpt = state.b_matrix * psi.transpose();         // n x m
  MatX inner = psi * bpt;                                    // m x m
  inner.diagonal().array() += 1.0;
  const Eigen::LLT<MatX> llt(inner);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(
        "rls_update: inner system not SPD; state is corrupted");

  const MatX gain = llt.solve(bpt.transpose()).transpose();  // n x m
  state.b_matrix.noalias() -= gain * bpt.transpose();
  state.b_matrix = 0.5 * (state.b_matrix + state.b_matrix.transpose()).eval();
  state.weights.noalias() +=
      gain * (batch_distances - psi * state.weights);
  state.n_samples_seen += m;
}

VecX fit_recursive(const PointMatrix& points, const VecX& distances,
                   const basis::BasisConfig& cfg, const FitConfig& fit_cfg,
                   Exec exec) {
  require(points.rows() >= 1, "fit_recursive: needs at least one sample");
  require(points.rows() == distances.size(),
          "fit_recursive: points/distances length mismatch");
  RlsState state = rls_init(cfg, fit_cfg);
  for (Eigen::Index start = 0; start < points.rows();
       start += fit_cfg.batch_size) {
    const Eigen::Index m =
        std::min<Eigen::Index>(fit_cfg.batch_size, points.rows() - start);
    rls_update(state, points.middleRows(start, m),
               distances.segment(start, m), exec);
  }
  return state.weights;
}

}  // namespace chainsdf::fit
