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

#include "chainsdf/planner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace chainsdf::planner {

namespace {

using kinematics::Pose;
using robotsdf::MinMode;
using robotsdf::QueryOptions;
using robotsdf::QueryResult;

struct ArmLayout {
  int offset;
  int dof;
};

std::vector<ArmLayout> arm_layout(const LiftProblem& problem) {
  std::vector<ArmLayout> layout;
  int offset = 0;
  for (const auto& arm : problem.arms) {
    const int dof = arm.model.chain.dof();
    layout.push_back({offset, dof});
    offset += dof;
  }
  return layout;
}

// Distances and joint-space gradients of one arm's SDF at world points,
// stacked into the full decision vector.
struct ArmPointEval {
  VecX f;              // per point
  MatX grad_q;         // n_points x total_dof (zero outside the arm block)
  std::vector<Vec3> grad_p_world;
};

ArmPointEval eval_arm(const LiftProblem& problem, int arm_idx,
                      const std::vector<ArmLayout>& layout, const VecX& q,
                      const PointMatrix& world_points, double rho, Exec exec) {
  const auto& arm = problem.arms[arm_idx];
  const int total = static_cast<int>(q.size());
  ArmPointEval out;
  out.f.resize(world_points.rows());
  out.grad_q = MatX::Zero(world_points.rows(), total);
  out.grad_p_world.resize(world_points.rows());

  PointMatrix base_points(world_points.rows(), 3);
  for (Eigen::Index i = 0; i < world_points.rows(); ++i)
    base_points.row(i) =
        arm.base_pose.apply_inverse(world_points.row(i).transpose())
            .transpose();

  QueryOptions opts;
  opts.mode = MinMode::Soft;
  opts.rho = rho;
  opts.want_grad_q = true;
  opts.exec = exec;
  const VecX q_arm = q.segment(layout[arm_idx].offset, layout[arm_idx].dof);
  const auto results =
      robotsdf::eval_points(arm.model, q_arm, base_points, opts);
  for (Eigen::Index i = 0; i < world_points.rows(); ++i) {
    out.f[i] = results[i].distance;
    out.grad_q.row(i).segment(layout[arm_idx].offset, layout[arm_idx].dof) =
        results[i].grad_q.transpose();
    out.grad_p_world[i] = arm.base_pose.rotation * results[i].grad_p;
  }
  return out;
}

PointMatrix effective_contacts(const LiftProblem& problem) {
  PointMatrix pts = problem.contact_points;
  if (problem.contact_inset != 0.0)
    pts += problem.contact_inset * problem.contact_normals;
  return pts;
}

VecX stacked_limits_min(const LiftProblem& problem) {
  VecX out(problem.total_dof());
  int offset = 0;
  for (const auto& arm : problem.arms) {
    out.segment(offset, arm.model.chain.dof()) = arm.model.chain.q_min;
    offset += arm.model.chain.dof();
  }
  return out;
}

VecX stacked_limits_max(const LiftProblem& problem) {
  VecX out(problem.total_dof());
  int offset = 0;
  for (const auto& arm : problem.arms) {
    out.segment(offset, arm.model.chain.dof()) = arm.model.chain.q_max;
    offset += arm.model.chain.dof();
  }
  return out;
}

// Everything the residual stack and Jacobian need in one pass.
struct ProblemEval {
  VecX r;        // weighted residual stack
  MatX jac;      // d r / d q (only when with_jacobian)
  // Raw block norms (unweighted).
  double norm_reach = 0.0;
  double norm_penetration = 0.0;
  double norm_limits = 0.0;
  double norm_posture = 0.0;
  std::vector<Vec3> contact_grad_world;  // assigned-arm grad at each contact
};

ProblemEval evaluate_problem(const LiftProblem& problem, const VecX& q,
                             double rho, bool with_jacobian, Exec exec) {
  problem.validate();
  require(q.size() == problem.total_dof(),
          "planner: q length must match the stacked arm dof");

  const auto layout = arm_layout(problem);
  const int total = problem.total_dof();
  const int n_arms = static_cast<int>(problem.arms.size());
  const int n_c = static_cast<int>(problem.contact_points.rows());
  const int n_i = static_cast<int>(problem.interior_points.rows());
  const auto assignment = problem.contact_assignment();
  const PointMatrix contacts = effective_contacts(problem);

  const int rows = n_c + n_arms * n_i + 3 * total;
  ProblemEval ev;
  ev.r = VecX::Zero(rows);
  if (with_jacobian) ev.jac = MatX::Zero(rows, total);
  ev.contact_grad_world.resize(n_c);

  // Per-arm SDF evaluations at its assigned contacts and all interior points.
  std::vector<ArmPointEval> contact_eval(n_arms), interior_eval(n_arms);
  for (int a = 0; a < n_arms; ++a) {
    std::vector<int> mine;
    for (int i = 0; i < n_c; ++i)
      if (assignment[i] == a) mine.push_back(i);
    if (!mine.empty()) {
      PointMatrix pts(mine.size(), 3);
      for (size_t m = 0; m < mine.size(); ++m)
        pts.row(m) = contacts.row(mine[m]);
      contact_eval[a] = eval_arm(problem, a, layout, q, pts, rho, exec);
      for (size_t m = 0; m < mine.size(); ++m) {
        const int i = mine[m];
        ev.r[i] = problem.weights.reach * contact_eval[a].f[m];
        ev.contact_grad_world[i] = contact_eval[a].grad_p_world[m];
        if (with_jacobian)
          ev.jac.row(i) =
              problem.weights.reach * contact_eval[a].grad_q.row(m);
        ev.norm_reach += contact_eval[a].f[m] * contact_eval[a].f[m];
      }
    }
    if (n_i > 0) {
      interior_eval[a] = eval_arm(problem, a, layout, q,
                                  problem.interior_points, rho, exec);
      for (int j = 0; j < n_i; ++j) {
        const int row = n_c + a * n_i + j;
        const double penetration = std::max(-interior_eval[a].f[j], 0.0);
        ev.r[row] = problem.weights.penetration * penetration;
        ev.norm_penetration += penetration * penetration;
        if (with_jacobian && penetration > 0.0)
          ev.jac.row(row) =
              -problem.weights.penetration * interior_eval[a].grad_q.row(j);
      }
    }
  }

  const VecX q_min = stacked_limits_min(problem);
  const VecX q_max = stacked_limits_max(problem);
  const int limits_row = n_c + n_arms * n_i;
  for (int j = 0; j < total; ++j) {
    const double over = std::max(q[j] - q_max[j], 0.0);
    const double under = std::max(q_min[j] - q[j], 0.0);
    ev.r[limits_row + j] = problem.weights.limits * over;
    ev.r[limits_row + total + j] = problem.weights.limits * under;
    ev.norm_limits += over * over + under * under;
    if (with_jacobian) {
      if (over > 0.0) ev.jac(limits_row + j, j) = problem.weights.limits;
      if (under > 0.0)
        ev.jac(limits_row + total + j, j) = -problem.weights.limits;
    }
  }

  const int posture_row = limits_row + 2 * total;
  for (int j = 0; j < total; ++j) {
    const double d = q[j] - problem.q_init[j];
    ev.r[posture_row + j] = problem.weights.posture * d;
    ev.norm_posture += d * d;
    if (with_jacobian)
      ev.jac(posture_row + j, j) = problem.weights.posture;
  }

  ev.norm_reach = std::sqrt(ev.norm_reach);
  ev.norm_penetration = std::sqrt(ev.norm_penetration);
  ev.norm_limits = std::sqrt(ev.norm_limits);
  ev.norm_posture = std::sqrt(ev.norm_posture);
  return ev;
}

}  // namespace

int LiftProblem::total_dof() const {
  int c = 0;
  for (const auto& arm : arms) c += arm.model.chain.dof();
  return c;
}

void LiftProblem::validate() const {
  require(!arms.empty() && arms.size() <= 2,
          "LiftProblem: one or two arms supported");
  for (const auto& arm : arms) arm.model.validate();
  require(contact_points.rows() >= 1, "LiftProblem: contact list is empty");
  require(interior_points.rows() >= 1, "LiftProblem: interior list is empty");
  require(contact_normals.rows() == contact_points.rows(),
          "LiftProblem: one normal per contact point required");
  for (Eigen::Index i = 0; i < contact_normals.rows(); ++i)
    require(std::abs(contact_normals.row(i).norm() - 1.0) < 1e-9,
            "LiftProblem: contact normals must be unit length");
  require(q_init.size() == total_dof(),
          "LiftProblem: q_init length must match the stacked dof");
  int offset = 0;
  for (const auto& arm : arms) {
    const int dof = arm.model.chain.dof();
    for (int j = 0; j < dof; ++j) {
      const double v = q_init[offset + j];
      require(v >= arm.model.chain.q_min[j] && v <= arm.model.chain.q_max[j],
              "LiftProblem: q_init violates joint limits");
    }
    offset += dof;
  }
}

std::vector<int> LiftProblem::contact_assignment() const {
  std::vector<int> assignment(contact_points.rows(), 0);
  if (arms.size() < 2) return assignment;
  for (Eigen::Index i = 0; i < contact_points.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (size_t a = 0; a < arms.size(); ++a) {
      const double d = (contact_points.row(i).transpose() -
                        arms[a].base_pose.translation)
                           .norm();
      if (d < best) {
        best = d;
        assignment[i] = static_cast<int>(a);
      }
    }
  }
  return assignment;
}

VecX residuals(const LiftProblem& problem, const VecX& q, double rho) {
  return evaluate_problem(problem, q, rho, false, Exec::OpenMP).r;
}

MatX residual_jacobian(const LiftProblem& problem, const VecX& q, double rho) {
  return evaluate_problem(problem, q, rho, true, Exec::OpenMP).jac;
}

TerminationFlags termination_check(const LiftProblem& problem, const VecX& q,
                                   const TerminationTols& tols, double rho) {
  const ProblemEval ev = evaluate_problem(problem, q, rho, false, Exec::OpenMP);
  TerminationFlags flags;
  flags.reach = ev.norm_reach * ev.norm_reach < tols.reach_sq;
  flags.penetration =
      ev.norm_penetration * ev.norm_penetration < tols.penetration_sq;

  const VecX q_min = stacked_limits_min(problem);
  const VecX q_max = stacked_limits_max(problem);
  flags.limits = ((q.array() > q_min.array()) && (q.array() < q_max.array()))
                     .all();

  double normal_sum = 0.0;
  bool normals_ok = true;
  for (Eigen::Index i = 0; i < problem.contact_points.rows(); ++i) {
    const Vec3 g = ev.contact_grad_world[i];
    const double norm = g.norm();
    if (norm < 1e-12) {
      normals_ok = false;  // cannot normalize: criterion fails, no throw
      break;
    }
    normal_sum +=
        1.0 - (g / norm).dot(problem.contact_normals.row(i).transpose());
  }
  flags.normals = normals_ok && normal_sum < tols.normal_sum;
  return flags;
}

PlanSolution gauss_newton(const LiftProblem& problem, const GnConfig& cfg,
                          const VecX& q0) {
  cfg.validate();
  require(q0.allFinite(), "gauss_newton: non-finite initial configuration");

  PlanSolution sol;
  VecX q = q0;
  double damping = cfg.damping;

  auto finish = [&](PlanStatus status, int iters) {
    const ProblemEval ev =
        evaluate_problem(problem, q, cfg.rho, false, cfg.exec);
    sol.q_final = q;
    sol.status = status;
    sol.iterations = iters;
    sol.cost = ev.r.squaredNorm();
    sol.norm_reach = ev.norm_reach;
    sol.norm_penetration = ev.norm_penetration;
    sol.norm_limits = ev.norm_limits;
    sol.norm_posture = ev.norm_posture;
    sol.flags = termination_check(problem, q, {}, cfg.rho);
    return sol;
  };

  if (termination_check(problem, q, {}, cfg.rho).all())
    return finish(PlanStatus::Converged, 0);

  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    const ProblemEval ev =
        evaluate_problem(problem, q, cfg.rho, true, cfg.exec);
    if (!ev.r.allFinite()) return finish(PlanStatus::Stalled, iter);
    const double cost = ev.r.squaredNorm();

    MatX h = ev.jac.transpose() * ev.jac;
    h.diagonal().array() += damping;
    const VecX g = ev.jac.transpose() * ev.r;
    const VecX dq = -h.ldlt().solve(g);
    if (!dq.allFinite()) return finish(PlanStatus::Stalled, iter);

    double alpha = 1.0;
    bool accepted = false;
    VecX q_try;
    while (alpha >= cfg.alpha_min) {
      q_try = q + alpha * dq;
      const VecX r_try =
          evaluate_problem(problem, q_try, cfg.rho, false, cfg.exec).r;
      if (r_try.allFinite() && r_try.squaredNorm() < cost) {
        accepted = true;
        break;
      }
      alpha *= cfg.backtrack_factor;
    }

    if (!accepted) {
      if (damping < cfg.damping_max) {
        damping = std::min(damping * 10.0, cfg.damping_max);
        continue;  // retry from the same q with stronger damping
      }
      return finish(PlanStatus::Stalled, iter);
    }

    const double step = (alpha * dq).norm();
    q = q_try;
    if (termination_check(problem, q, {}, cfg.rho).all())
      return finish(PlanStatus::Converged, iter);
    if (step < cfg.step_tol) return finish(PlanStatus::Stalled, iter);
  }
  return finish(PlanStatus::MaxIters, cfg.max_iters);
}

std::vector<PlanSolution> batch_plan(const LiftProblem& problem,
                                     const GnConfig& cfg, int n_seeds,
                                     std::uint64_t seed) {
  require(n_seeds >= 1, "batch_plan: n_seeds must be >= 1");
  problem.validate();

  const VecX q_min = stacked_limits_min(problem);
  const VecX q_max = stacked_limits_max(problem);
  const int total = problem.total_dof();

  std::vector<VecX> starts(n_seeds);
  Rng rng(seed);
  for (int s = 0; s < n_seeds; ++s) {
    Rng srng = rng.stream(s);
    starts[s].resize(total);
    for (int j = 0; j < total; ++j)
      starts[s][j] = srng.uniform(q_min[j], q_max[j]);
  }

  std::vector<PlanSolution> solutions(n_seeds);
  GnConfig run_cfg = cfg;
  if (n_seeds > 1) run_cfg.exec = Exec::Serial;  // parallelism at seed level
  parallel_for(n_seeds, cfg.exec, [&](std::int64_t s) {
    solutions[s] = gauss_newton(problem, run_cfg, starts[s]);
    solutions[s].seed_index = static_cast<int>(s);
  });

  std::stable_sort(solutions.begin(), solutions.end(),
                   [](const PlanSolution& a, const PlanSolution& b) {
                     const bool ca = a.status == PlanStatus::Converged;
                     const bool cb = b.status == PlanStatus::Converged;
                     if (ca != cb) return ca;
                     if (a.cost != b.cost) return a.cost < b.cost;
                     return a.seed_index < b.seed_index;
                   });
  return solutions;
}

Trajectory cubic_spline_trajectory(const VecX& q_start, const VecX& q_goal,
                                   double duration, double dt) {
  require(q_start.size() == q_goal.size(),
          "cubic_spline_trajectory: endpoint dimension mismatch");
  require(duration > 0.0, "cubic_spline_trajectory: duration must be positive");
  require(dt > 0.0, "cubic_spline_trajectory: dt must be positive");
  require(dt <= duration, "cubic_spline_trajectory: dt exceeds duration");

  Trajectory traj;
  const auto n_steps = static_cast<std::int64_t>(duration / dt);
  for (std::int64_t i = 0; i <= n_steps; ++i) {
    const double t = std::min(double(i) * dt, duration);
    const double s = t / duration;
    const double h = s * s * (3.0 - 2.0 * s);  // zero end velocities
    traj.times.push_back(t);
    traj.waypoints.push_back(q_start + h * (q_goal - q_start));
  }
  if (traj.times.back() < duration) {
    traj.times.push_back(duration);
    traj.waypoints.push_back(q_goal);
  }
  return traj;
}

namespace {

using nlohmann::ordered_json;

PointMatrix point_matrix_from(const ordered_json& j, const std::string& field) {
  if (!j.is_array() || j.empty())
    throw std::runtime_error("problem file: field '" + field +
                             "' must be a nonempty array of 3-vectors");
  PointMatrix m(j.size(), 3);
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != 3)
      throw std::runtime_error("problem file: field '" + field +
                               "' entries must be 3-vectors");
    for (int k = 0; k < 3; ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

ordered_json point_matrix_json(const PointMatrix& m) {
  ordered_json j = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    j.push_back({m(i, 0), m(i, 1), m(i, 2)});
  return j;
}

std::string dir_of(const std::string& path) {
  const auto slash = path.find_last_of('/');
  return slash == std::string::npos ? std::string(".") : path.substr(0, slash);
}

}  // namespace

LiftProblem load_problem_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_problem_json: cannot open " + path);
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("load_problem_json: " + path + ": " + e.what());
  }
  if (j.value("format", "") != "chainsdf.problem")
    throw std::runtime_error("problem file: missing 'chainsdf.problem' header");
  if (j.value("version", 0) != 1)
    throw std::runtime_error("problem file: unsupported version");

  LiftProblem problem;
  for (const auto& a : j.at("arms")) {
    ArmModel arm;
    std::string model_path = a.at("model").get<std::string>();
    if (model_path.front() != '/')
      model_path = dir_of(path) + "/" + model_path;
    arm.model = robotsdf::load_model(model_path);
    if (a.contains("base_pose")) {
      const auto& bp = a.at("base_pose");
      if (bp.contains("rotation")) {
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c)
            arm.base_pose.rotation(r, c) =
                bp.at("rotation")[3 * r + c].get<double>();
      }
      if (bp.contains("translation"))
        for (int k = 0; k < 3; ++k)
          arm.base_pose.translation[k] = bp.at("translation")[k].get<double>();
      arm.base_pose.validate();
    }
    problem.arms.push_back(std::move(arm));
  }
  if (!j.contains("contact_points"))
    throw std::runtime_error("problem file: missing field 'contact_points'");
  if (!j.contains("contact_normals"))
    throw std::runtime_error("problem file: missing field 'contact_normals'");
  if (!j.contains("interior_points"))
    throw std::runtime_error("problem file: missing field 'interior_points'");
  problem.contact_points = point_matrix_from(j.at("contact_points"),
                                             "contact_points");
  problem.contact_normals = point_matrix_from(j.at("contact_normals"),
                                              "contact_normals");
  problem.interior_points = point_matrix_from(j.at("interior_points"),
                                              "interior_points");
  const auto qi = j.at("q_init").get<std::vector<double>>();
  problem.q_init = Eigen::Map<const VecX>(qi.data(), qi.size());
  if (j.contains("weights")) {
    const auto& w = j.at("weights");
    problem.weights.reach = w.value("reach", problem.weights.reach);
    problem.weights.penetration =
        w.value("penetration", problem.weights.penetration);
    problem.weights.limits = w.value("limits", problem.weights.limits);
    problem.weights.posture = w.value("posture", problem.weights.posture);
  }
  problem.contact_inset = j.value("contact_inset", 0.0);
  problem.validate();
  return problem;
}

void save_problem_json(const LiftProblem& problem,
                       const std::vector<std::string>& model_paths,
                       const std::string& path) {
  require(model_paths.size() == problem.arms.size(),
          "save_problem_json: one model path per arm required");
  ordered_json j;
  j["format"] = "chainsdf.problem";
  j["version"] = 1;
  j["arms"] = ordered_json::array();
  for (size_t a = 0; a < problem.arms.size(); ++a) {
    ordered_json arm;
    arm["model"] = model_paths[a];
    ordered_json bp;
    ordered_json rot = ordered_json::array();
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        rot.push_back(problem.arms[a].base_pose.rotation(r, c));
    bp["rotation"] = rot;
    bp["translation"] = {problem.arms[a].base_pose.translation[0],
                         problem.arms[a].base_pose.translation[1],
                         problem.arms[a].base_pose.translation[2]};
    arm["base_pose"] = bp;
    j["arms"].push_back(arm);
  }
  j["contact_points"] = point_matrix_json(problem.contact_points);
  j["contact_normals"] = point_matrix_json(problem.contact_normals);
  j["interior_points"] = point_matrix_json(problem.interior_points);
  j["q_init"] = std::vector<double>(problem.q_init.begin(),
                                    problem.q_init.end());
  j["weights"] = {{"reach", problem.weights.reach},
                  {"penetration", problem.weights.penetration},
                  {"limits", problem.weights.limits},
                  {"posture", problem.weights.posture}};
  j["contact_inset"] = problem.contact_inset;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_problem_json: cannot open " + path);
  out << j.dump(2) << "\n";
}

namespace {

const char* status_name(PlanStatus s) {
  switch (s) {
    case PlanStatus::Converged: return "converged";
    case PlanStatus::MaxIters: return "max_iters";
    case PlanStatus::Stalled: return "stalled";
  }
  return "unknown";
}

}  // namespace

void save_solutions_csv(const std::vector<PlanSolution>& solutions,
                        const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("save_solutions_csv: cannot open " + path);
  std::fputs(
      "seed,status,iterations,norm_reach,norm_penetration,norm_limits,"
      "norm_posture,cost,q_final\n",
      f);
  for (const auto& s : solutions) {
    std::fprintf(f, "%d,%s,%d,%.9g,%.9g,%.9g,%.9g,%.9g,", s.seed_index,
                 status_name(s.status), s.iterations, s.norm_reach,
                 s.norm_penetration, s.norm_limits, s.norm_posture, s.cost);
    for (Eigen::Index j = 0; j < s.q_final.size(); ++j)
      std::fprintf(f, j + 1 < s.q_final.size() ? "%.17g " : "%.17g",
                   s.q_final[j]);
    std::fputs("\n", f);
  }
  std::fclose(f);
}

void save_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("save_trajectory_csv: cannot open " + path);
  std::fputs("t,q\n", f);
  for (size_t i = 0; i < traj.times.size(); ++i) {
    std::fprintf(f, "%.9g,", traj.times[i]);
    for (Eigen::Index j = 0; j < traj.waypoints[i].size(); ++j)
      std::fprintf(f, j + 1 < traj.waypoints[i].size() ? "%.17g " : "%.17g",
                   traj.waypoints[i][j]);
    std::fputs("\n", f);
  }
  std::fclose(f);
}

}  // namespace chainsdf::planner
