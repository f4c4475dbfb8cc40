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

#include "chainsdf/avoid.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include <json.hpp>

namespace chainsdf::avoid {

namespace {

using kinematics::Pose;

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

VecX ObstacleScript::at(double t) const {
  validate();
  if (t <= times.front()) return configs.front();
  if (t >= times.back()) return configs.back();
  size_t hi = 1;
  while (times[hi] < t) ++hi;
  const double s = (t - times[hi - 1]) / (times[hi] - times[hi - 1]);
  return configs[hi - 1] + s * (configs[hi] - configs[hi - 1]);
}

void ObstacleScript::validate() const {
  require(!times.empty() && times.size() == configs.size(),
          "ObstacleScript: one config per time required");
  for (size_t i = 1; i < times.size(); ++i)
    require(times[i] > times[i - 1],
            "ObstacleScript: times must be strictly increasing");
}

void AvoidanceScene::validate() const {
  controlled.model.validate();
  require(target.allFinite(), "AvoidanceScene: non-finite target");
  require(n_obstacle_samples >= 1,
          "AvoidanceScene: n_obstacle_samples must be >= 1");
  if (std::holds_alternative<ObstacleChain>(obstacle)) {
    const auto& oc = std::get<ObstacleChain>(obstacle);
    oc.chain.validate();
    require(!oc.chain.attachments.empty(),
            "AvoidanceScene: obstacle chain has no geometry");
    oc.script.validate();
  } else {
    require(std::get<PointMatrix>(obstacle).rows() >= 1,
            "AvoidanceScene: obstacle cloud is empty");
  }
}

void QpProblem::validate() const {
  const Eigen::Index n = hessian.rows();
  require(hessian.cols() == n && gradient.size() == n,
          "QpProblem: inconsistent dimensions");
  require((hessian - hessian.transpose()).cwiseAbs().maxCoeff() < 1e-9,
          "QpProblem: Hessian must be symmetric");
  Eigen::LLT<MatX> llt(hessian);
  require(llt.info() == Eigen::Success,
          "QpProblem: Hessian must be positive definite");
  if (a_ineq.rows() > 0)
    require(a_ineq.cols() == n && b_ineq.size() == a_ineq.rows(),
            "QpProblem: constraint dimensions inconsistent");
  require(lower.size() == n && upper.size() == n,
          "QpProblem: bound dimensions inconsistent");
  for (Eigen::Index i = 0; i < n; ++i)
    require(lower[i] <= upper[i], "QpProblem: empty bound interval");
}

namespace {

// Canonical row form: every constraint as a row of  a.x >= b.
struct CanonicalQp {
  MatX h;
  VecX g;
  MatX a;          // all rows: user rows first, then finite bounds
  VecX b;
  int n_user = 0;  // rows carried over from QpProblem::a_ineq
};

CanonicalQp canonicalize(const QpProblem& prob) {
  CanonicalQp c;
  c.h = prob.hessian;
  c.g = prob.gradient;
  c.n_user = static_cast<int>(prob.a_ineq.rows());
  const Eigen::Index n = prob.hessian.rows();
  std::vector<std::pair<VecX, double>> rows;
  for (Eigen::Index i = 0; i < prob.a_ineq.rows(); ++i)
    rows.push_back({prob.a_ineq.row(i).transpose(), prob.b_ineq[i]});
  for (Eigen::Index j = 0; j < n; ++j) {
    if (std::isfinite(prob.lower[j])) {
      VecX e = VecX::Zero(n);
      e[j] = 1.0;
      rows.push_back({e, prob.lower[j]});
    }
    if (std::isfinite(prob.upper[j])) {
      VecX e = VecX::Zero(n);
      e[j] = -1.0;
      rows.push_back({e, -prob.upper[j]});
    }
  }
  c.a.resize(rows.size(), n);
  c.b.resize(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    c.a.row(i) = rows[i].first.transpose();
    c.b[i] = rows[i].second;
  }
  return c;
}

struct CoreResult {
  VecX x;
  VecX multipliers;  // one per row
  bool optimal = false;
  int iterations = 0;
};

// Primal active-set iteration for strictly convex H, feasible start x0.
CoreResult active_set_core(const MatX& h, const VecX& g, const MatX& a,
                           const VecX& b, const VecX& x0) {
  constexpr double kTolActive = 1e-9;
  constexpr double kTolStep = 1e-11;
  constexpr double kTolMult = 1e-10;

  const Eigen::Index n = h.rows();
  const Eigen::Index m = a.rows();
  CoreResult res;
  res.x = x0;
  res.multipliers = VecX::Zero(m);

  std::vector<int> working;
  std::vector<char> in_working(m, 0);
  for (Eigen::Index i = 0; i < m; ++i)
    if (a.row(i).dot(res.x) - b[i] <= kTolActive) {
      working.push_back(static_cast<int>(i));
      in_working[i] = 1;
    }

  const int max_iters = 50 * static_cast<int>(n + m + 5);
  for (res.iterations = 0; res.iterations < max_iters; ++res.iterations) {
    const Eigen::Index w = static_cast<Eigen::Index>(working.size());
    MatX kkt = MatX::Zero(n + w, n + w);
    kkt.topLeftCorner(n, n) = h;
    for (Eigen::Index k = 0; k < w; ++k) {
      kkt.block(0, n + k, n, 1) = -a.row(working[k]).transpose();
      kkt.block(n + k, 0, 1, n) = a.row(working[k]);
    }
    VecX rhs = VecX::Zero(n + w);
    rhs.head(n) = -(h * res.x + g);

    // COD tolerates a (nearly) dependent working set.
    const VecX sol = kkt.completeOrthogonalDecomposition().solve(rhs);
    const VecX p = sol.head(n);
    const VecX lambda = sol.tail(w);

    if (p.norm() <= kTolStep * (1.0 + res.x.norm())) {
      int drop = -1;
      double most_negative = -kTolMult;
      for (Eigen::Index k = 0; k < w; ++k)
        if (lambda[k] < most_negative) {
          most_negative = lambda[k];
          drop = static_cast<int>(k);
        }
      if (drop < 0) {
        res.multipliers.setZero();
        for (Eigen::Index k = 0; k < w; ++k)
          res.multipliers[working[k]] = std::max(lambda[k], 0.0);
        res.optimal = true;
        return res;
      }
      in_working[working[drop]] = 0;
      working.erase(working.begin() + drop);
      continue;
    }

    double alpha = 1.0;
    int blocker = -1;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (in_working[i]) continue;
      const double d = a.row(i).dot(p);
      if (d >= -1e-13) continue;  // moving away from or along the boundary
      const double gap = a.row(i).dot(res.x) - b[i];
      const double ai = std::max(gap, 0.0) / (-d);
      if (ai < alpha) {
        alpha = ai;
        blocker = static_cast<int>(i);
      }
    }
    res.x += alpha * p;
    if (blocker >= 0) {
      working.push_back(blocker);
      in_working[blocker] = 1;
    }
  }
  return res;  // cycling guard tripped: res.optimal stays false
}

}  // namespace

QpSolution solve_qp(const QpProblem& prob) {
  prob.validate();
  const CanonicalQp c = canonicalize(prob);
  const Eigen::Index n = c.h.rows();
  const Eigen::Index m = c.a.rows();

  // Start inside the box bounds.
  VecX x0 = VecX::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j)
    x0[j] = std::min(std::max(0.0, prob.lower[j]), prob.upper[j]);

  double worst = 0.0;
  for (Eigen::Index i = 0; i < m; ++i)
    worst = std::max(worst, c.b[i] - c.a.row(i).dot(x0));

  QpSolution out;
  if (worst > 1e-12) {
    // Phase 1: minimize tau^2 over (x, tau) with the user rows relaxed by
    // tau; box rows stay hard (x0 satisfies them).
    const Eigen::Index np = n + 1;
    MatX hp = MatX::Identity(np, np) * 1e-6;
    hp(n, n) = 1.0;
    VecX gp = VecX::Zero(np);
    MatX ap = MatX::Zero(m + 1, np);
    VecX bp(m + 1);
    ap.topLeftCorner(m, n) = c.a;
    for (Eigen::Index i = 0; i < m; ++i) ap(i, n) = 1.0;
    bp.head(m) = c.b;
    ap(m, n) = 1.0;  // tau >= 0
    bp[m] = 0.0;
    VecX y0(np);
    y0.head(n) = x0;
    y0[n] = worst + 1e-9;
    const CoreResult phase1 = active_set_core(hp, gp, ap, bp, y0);
    if (!phase1.optimal || phase1.x[n] > 1e-7) {
      out.status = QpStatus::Infeasible;
      out.iterations = phase1.iterations;
      return out;
    }
    x0 = phase1.x.head(n);
  }

  const CoreResult core = active_set_core(c.h, c.g, c.a, c.b, x0);
  if (!core.optimal) {
    out.status = QpStatus::Infeasible;
    out.iterations = core.iterations;
    return out;
  }

  out.x = core.x;
  out.status = QpStatus::Optimal;
  out.iterations = core.iterations;
  out.multipliers = core.multipliers.head(c.n_user);
  for (int i = 0; i < c.n_user; ++i)
    if (core.multipliers[i] > 0.0 ||
        c.a.row(i).dot(core.x) - c.b[i] <= 1e-9)
      out.active_set.push_back(i);

  // KKT audit over all rows (user + bounds).
  VecX stationarity = c.h * core.x + c.g;
  double feas = 0.0, comp = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double slack = c.a.row(i).dot(core.x) - c.b[i];
    stationarity -= core.multipliers[i] * c.a.row(i).transpose();
    feas = std::max(feas, -slack);
    comp = std::max(comp, std::abs(core.multipliers[i] * slack));
  }
  out.kkt_stationarity = stationarity.cwiseAbs().maxCoeff();
  out.kkt_feasibility = feas;
  out.kkt_complementarity = comp;
  return out;
}

PointMatrix sample_obstacle_points(const AvoidanceScene& scene,
                                   const VecX& obstacle_q, std::uint64_t seed) {
  scene.validate();
  Rng rng(seed);
  const int n = scene.n_obstacle_samples;

  if (std::holds_alternative<PointMatrix>(scene.obstacle)) {
    const PointMatrix& cloud = std::get<PointMatrix>(scene.obstacle);
    if (cloud.rows() <= n) return cloud;
    PointMatrix out(n, 3);
    for (int i = 0; i < n; ++i)
      out.row(i) = cloud.row(static_cast<Eigen::Index>(
          rng.uniform_index(static_cast<std::uint64_t>(cloud.rows()))));
    return out;
  }

  const auto& oc = std::get<ObstacleChain>(scene.obstacle);
  const auto fk = kinematics::forward_kinematics_full(oc.chain, obstacle_q);

  std::vector<double> areas;
  double total_area = 0.0;
  for (const auto& att : oc.chain.attachments) {
    areas.push_back(geometry::shape_area(att.shape));
    total_area += areas.back();
  }
  require(total_area > 0.0, "sample_obstacle_points: zero-area obstacle");

  PointMatrix out(n, 3);
  for (int i = 0; i < n; ++i) {
    double pick = rng.uniform() * total_area;
    size_t a = 0;
    for (; a + 1 < areas.size() && pick > areas[a]; ++a) pick -= areas[a];
    const auto& att = oc.chain.attachments[a];
    const Pose world_pose =
        oc.base_pose.compose(fk.frames[att.frame].compose(att.local_pose));
    out.row(i) =
        world_pose.apply(geometry::sample_shape_surface(att.shape, rng))
            .transpose();
  }
  return out;
}

namespace {

// World end-effector position and its positional Jacobian for the controlled
// arm. J_world = -R_base R_ee * point_frame_jacobian evaluated at the
// end-effector origin (the frame-relative derivative of a fixed point equals
// minus the frame velocity there).
void end_effector(const robotsdf::PosedModel& arm, const VecX& q, Vec3* pos,
                  MatX* jac) {
  const auto fk = kinematics::forward_kinematics_full(arm.model.chain, q);
  const int ee = arm.model.chain.end_effector_frame();
  const Vec3 t_base = fk.frames[ee].translation;
  *pos = arm.base_pose.apply(t_base);
  if (jac) {
    const MatX pfj =
        kinematics::point_frame_jacobian(arm.model.chain, fk, ee, t_base);
    *jac = -arm.base_pose.rotation * fk.frames[ee].rotation * pfj;
  }
}

double oracle_min_distance(const robotsdf::PosedModel& arm, const VecX& q,
                           const PointMatrix& points) {
  const auto fk = kinematics::forward_kinematics_full(arm.model.chain, q);
  double best = kInf;
  for (const auto& att : arm.model.chain.attachments) {
    const Pose world_pose =
        arm.base_pose.compose(fk.frames[att.frame].compose(att.local_pose));
    for (Eigen::Index i = 0; i < points.rows(); ++i)
      best = std::min(
          best, geometry::shape_sdf(
                    att.shape,
                    world_pose.apply_inverse(points.row(i).transpose())));
  }
  return best;
}

}  // namespace

QpProblem build_qp(const AvoidanceScene& scene, const ControllerConfig& cfg,
                   const VecX& q, const PointMatrix& obstacle_points) {
  cfg.validate();
  const auto& arm = scene.controlled;
  const int c = arm.model.chain.dof();
  const int nv = c + 1;  // qd plus one slack

  Vec3 ee_pos;
  MatX j_ee;
  end_effector(arm, q, &ee_pos, &j_ee);
  Vec3 v_des = cfg.kp * (scene.target - ee_pos);
  const double vn = v_des.norm();
  if (vn > cfg.v_max) v_des *= cfg.v_max / vn;

  QpProblem prob;
  prob.hessian = MatX::Zero(nv, nv);
  prob.hessian.topLeftCorner(c, c) =
      2.0 * (j_ee.transpose() * j_ee + cfg.mu * MatX::Identity(c, c));
  prob.hessian(c, c) = 2.0 * cfg.slack_weight;
  prob.gradient = VecX::Zero(nv);
  prob.gradient.head(c) = -2.0 * j_ee.transpose() * v_des;

  // Distance rows for the worst-K obstacle points.
  robotsdf::QueryOptions opts;
  opts.want_grad_q = true;
  PointMatrix base_points(obstacle_points.rows(), 3);
  for (Eigen::Index i = 0; i < obstacle_points.rows(); ++i)
    base_points.row(i) =
        arm.base_pose.apply_inverse(obstacle_points.row(i).transpose())
            .transpose();
  const auto results = robotsdf::eval_points(arm.model, q, base_points, opts);

  std::vector<int> order(results.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return results[a].distance < results[b].distance;
  });
  const int k = std::min<int>(cfg.worst_k, static_cast<int>(order.size()));

  prob.a_ineq = MatX::Zero(k, nv);
  prob.b_ineq = VecX::Zero(k);
  for (int r = 0; r < k; ++r) {
    const auto& res = results[order[r]];
    prob.a_ineq.row(r).head(c) = res.grad_q.transpose();
    prob.a_ineq(r, c) = 1.0;  // slack
    prob.b_ineq[r] = -cfg.xi * (res.distance - cfg.d_safe);
  }

  // Velocity bounds tightened by the joint-limit deceleration rule.
  prob.lower = VecX::Constant(nv, -kInf);
  prob.upper = VecX::Constant(nv, kInf);
  for (int j = 0; j < c; ++j) {
    prob.lower[j] = std::max(-cfg.qd_max,
                             (arm.model.chain.q_min[j] - q[j]) / cfg.dt);
    prob.upper[j] = std::min(cfg.qd_max,
                             (arm.model.chain.q_max[j] - q[j]) / cfg.dt);
    // A configuration already past a limit leaves an empty interval; pin it.
    if (prob.lower[j] > prob.upper[j]) prob.lower[j] = prob.upper[j];
  }
  prob.lower[c] = 0.0;
  return prob;
}

EpisodeReport run_episode(const AvoidanceScene& scene,
                          const ControllerConfig& cfg, const VecX& q0,
                          int max_steps, std::uint64_t seed) {
  scene.validate();
  cfg.validate();
  require(max_steps >= 1, "run_episode: max_steps must be >= 1");

  const auto t_start = std::chrono::steady_clock::now();
  EpisodeReport report;
  VecX q = q0;
  const int c = scene.controlled.model.chain.dof();
  Rng rng(seed);

  for (int step = 0; step < max_steps; ++step) {
    VecX q_obs;
    if (std::holds_alternative<ObstacleChain>(scene.obstacle))
      q_obs = std::get<ObstacleChain>(scene.obstacle).script.at(step * cfg.dt);
    const PointMatrix pts = sample_obstacle_points(
        scene, q_obs, rng.stream(static_cast<std::uint64_t>(step)).next_u64());

    report.min_distance_seen = std::min(
        report.min_distance_seen, oracle_min_distance(scene.controlled, q, pts));

    const QpProblem prob = build_qp(scene, cfg, q, pts);
    const QpSolution sol = solve_qp(prob);
    ++report.steps;
    if (sol.status != QpStatus::Optimal) {
      ++report.qp_infeasible_count;
      break;
    }
    report.max_slack = std::max(report.max_slack, sol.x[c]);

    q += cfg.dt * sol.x.head(c);
    report.trajectory.push_back(q);
    report.min_distance_seen = std::min(
        report.min_distance_seen, oracle_min_distance(scene.controlled, q, pts));

    Vec3 ee_pos;
    end_effector(scene.controlled, q, &ee_pos, nullptr);
    if ((ee_pos - scene.target).norm() < cfg.reach_tol) {
      report.reached = true;
      break;
    }
  }

  report.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t_start)
                       .count();
  return report;
}

namespace {

using nlohmann::ordered_json;

std::string dir_of(const std::string& path) {
  const auto slash = path.find_last_of('/');
  return slash == std::string::npos ? std::string(".") : path.substr(0, slash);
}

Pose pose_from_json(const ordered_json& bp) {
  Pose pose;
  if (bp.contains("rotation"))
    for (int r = 0; r < 3; ++r)
      for (int col = 0; col < 3; ++col)
        pose.rotation(r, col) = bp.at("rotation")[3 * r + col].get<double>();
  if (bp.contains("translation"))
    for (int k = 0; k < 3; ++k)
      pose.translation[k] = bp.at("translation")[k].get<double>();
  pose.validate();
  return pose;
}

}  // namespace

AvoidanceScene load_scene_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_scene_json: cannot open " + path);
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("load_scene_json: " + path + ": " + e.what());
  }
  if (j.value("format", "") != "chainsdf.scene")
    throw std::runtime_error("scene file: missing 'chainsdf.scene' header");
  if (j.value("version", 0) != 1)
    throw std::runtime_error("scene file: unsupported version");

  AvoidanceScene scene;
  const auto& ctrl = j.at("controlled");
  std::string model_path = ctrl.at("model").get<std::string>();
  if (model_path.front() != '/') model_path = dir_of(path) + "/" + model_path;
  scene.controlled.model = robotsdf::load_model(model_path);
  if (ctrl.contains("base_pose"))
    scene.controlled.base_pose = pose_from_json(ctrl.at("base_pose"));

  const auto& obs = j.at("obstacle");
  const std::string type = obs.at("type").get<std::string>();
  if (type == "chain") {
    ObstacleChain oc;
    std::string chain_path = obs.at("chain").get<std::string>();
    if (chain_path.front() != '/') chain_path = dir_of(path) + "/" + chain_path;
    oc.chain = kinematics::load_chain_json(chain_path);
    if (obs.contains("base_pose"))
      oc.base_pose = pose_from_json(obs.at("base_pose"));
    const auto& script = obs.at("script");
    oc.script.times = script.at("times").get<std::vector<double>>();
    for (const auto& cfg_json : script.at("configs")) {
      const auto vals = cfg_json.get<std::vector<double>>();
      oc.script.configs.push_back(
          Eigen::Map<const VecX>(vals.data(), vals.size()));
    }
    scene.obstacle = std::move(oc);
  } else if (type == "cloud") {
    const auto& pts = obs.at("points");
    PointMatrix cloud(pts.size(), 3);
    for (size_t i = 0; i < pts.size(); ++i)
      for (int k = 0; k < 3; ++k) cloud(i, k) = pts[i][k].get<double>();
    scene.obstacle = cloud;
  } else {
    throw std::runtime_error("scene file: unknown obstacle type '" + type +
                             "'");
  }
  for (int k = 0; k < 3; ++k) scene.target[k] = j.at("target")[k].get<double>();
  scene.n_obstacle_samples = j.value("n_obstacle_samples", 256);
  scene.validate();
  return scene;
}

void save_episodes_csv(const std::vector<EpisodeReport>& episodes,
                       const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("save_episodes_csv: cannot open " + path);
  std::fputs("reached,qp_infeasible,min_distance_m,steps,wall_ms\n", f);
  double reach_rate = 0.0, infeasible_rate = 0.0, min_d = kInf;
  double mean_steps = 0.0, mean_ms = 0.0;
  for (const auto& e : episodes) {
    std::fprintf(f, "%d,%d,%.9g,%d,%.3f\n", e.reached ? 1 : 0,
                 e.qp_infeasible_count > 0 ? 1 : 0, e.min_distance_seen,
                 e.steps, e.wall_ms);
    reach_rate += e.reached ? 1.0 : 0.0;
    infeasible_rate += e.qp_infeasible_count > 0 ? 1.0 : 0.0;
    min_d = std::min(min_d, e.min_distance_seen);
    mean_steps += e.steps;
    mean_ms += e.wall_ms;
  }
  const double n = static_cast<double>(episodes.size());
  if (n > 0)
    std::fprintf(f, "%.9g,%.9g,%.9g,%.9g,%.3f\n", reach_rate / n,
                 infeasible_rate / n, min_d, mean_steps / n, mean_ms / n);
  std::fclose(f);
}

}  // namespace chainsdf::avoid
