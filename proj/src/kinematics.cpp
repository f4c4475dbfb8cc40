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

#include "chainsdf/kinematics.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace chainsdf::kinematics {

double Pose::orthonormality_error() const {
  const double ortho =
      (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  const double det = std::abs(rotation.determinant() - 1.0);
  return std::max(ortho, det);
}

void Pose::validate() const {
  require(orthonormality_error() < 1e-9,
          "Pose: rotation is not orthonormal within 1e-9");
  require(translation.allFinite(), "Pose: non-finite translation");
}

int KinematicChain::dof() const {
  int c = 0;
  for (const auto& row : rows)
    if (row.kind == JointKind::Revolute) ++c;
  return c;
}

void KinematicChain::validate() const {
  require(!rows.empty(), "KinematicChain: no rows");
  const int c = dof();
  require(c >= 1, "KinematicChain: needs at least one revolute joint");
  require(q_min.size() == c && q_max.size() == c,
          "KinematicChain: joint limits must have one entry per revolute row");
  for (int j = 0; j < c; ++j)
    require(q_min[j] < q_max[j], "KinematicChain: q_min must be below q_max");
  for (const auto& att : attachments)
    require(att.frame >= 1 && att.frame <= num_frames(),
            "KinematicChain: attachment references a missing frame");
  require(ee_frame == -1 || (ee_frame >= 1 && ee_frame <= num_frames()),
          "KinematicChain: ee_frame out of range");
}

Pose dh_transform(const DhRow& row, DhConvention convention, double q) {
  const double theta =
      row.kind == JointKind::Revolute ? q + row.theta_offset : row.theta_offset;
  const double ct = std::cos(theta), st = std::sin(theta);
  const double ca = std::cos(row.alpha), sa = std::sin(row.alpha);
  Pose p;
  if (convention == DhConvention::Classic) {
    // Rot_z(theta) Trans_z(d) Trans_x(a) Rot_x(alpha)
    p.rotation << ct, -st * ca, st * sa,
                  st, ct * ca, -ct * sa,
                  0.0, sa, ca;
    p.translation << row.a * ct, row.a * st, row.d;
  } else {
    // Rot_x(alpha) Trans_x(a) Rot_z(theta) Trans_z(d)
    p.rotation << ct, -st, 0.0,
                  st * ca, ct * ca, -sa,
                  st * sa, ct * sa, ca;
    p.translation << row.a, -sa * row.d, ca * row.d;
  }
  return p;
}

FkResult forward_kinematics_full(const KinematicChain& chain, const VecX& q) {
  chain.validate();
  require(q.size() == chain.dof(),
          "forward_kinematics: q length must equal the chain dof");
  require(q.allFinite(), "forward_kinematics: non-finite joint values");

  FkResult fk;
  fk.frames.reserve(chain.rows.size() + 1);
  fk.frames.push_back(Pose::identity());
  fk.joint_of_row.assign(chain.rows.size(), -1);

  int joint = 0;
  for (size_t i = 0; i < chain.rows.size(); ++i) {
    const DhRow& row = chain.rows[i];
    double qi = 0.0;
    if (row.kind == JointKind::Revolute) {
      qi = q[joint];
      fk.joint_of_row[i] = joint;
      // The revolute rotation acts about the z axis of the pose in which
      // Rot_z is applied: the previous frame for classic DH, the frame after
      // the Rot_x/Trans_x prefix for modified DH.
      Pose axis_pose = fk.frames.back();
      if (chain.convention == DhConvention::Modified) {
        DhRow prefix;  // Rot_x(alpha) Trans_x(a) only
        prefix.a = row.a;
        prefix.alpha = row.alpha;
        prefix.kind = JointKind::Fixed;
        axis_pose = axis_pose.compose(
            dh_transform(prefix, DhConvention::Modified, 0.0));
      }
      fk.joint_axis.push_back(axis_pose.rotation.col(2));
      fk.joint_origin.push_back(axis_pose.translation);
      ++joint;
    }
    fk.frames.push_back(
        fk.frames.back().compose(dh_transform(row, chain.convention, qi)));
  }
  return fk;
}

std::vector<Pose> forward_kinematics(const KinematicChain& chain,
                                     const VecX& q) {
  return forward_kinematics_full(chain, q).frames;
}

Vec3 point_to_link_frame(const KinematicChain& chain, const VecX& q, int k,
                         const Vec3& p_world) {
  const auto frames = forward_kinematics(chain, q);
  require(k >= 0 && k < static_cast<int>(frames.size()),
          "point_to_link_frame: frame index out of range");
  return frames[k].apply_inverse(p_world);
}

MatX point_frame_jacobian(const KinematicChain& chain, const FkResult& fk,
                          int k, const Vec3& p_world) {
  require(k >= 0 && k < static_cast<int>(fk.frames.size()),
          "point_frame_jacobian: frame index out of range");
  const int c = chain.dof();
  MatX jac = MatX::Zero(3, c);
  const Mat3 rt = fk.frames[k].rotation.transpose();
  for (int row = 0; row < k; ++row) {
    const int j = fk.joint_of_row[row];
    if (j < 0) continue;
    const Vec3 lever = p_world - fk.joint_origin[j];
    jac.col(j) = -rt * fk.joint_axis[j].cross(lever);
  }
  return jac;
}

MatX point_frame_jacobian(const KinematicChain& chain, const VecX& q, int k,
                          const Vec3& p_world) {
  return point_frame_jacobian(chain, forward_kinematics_full(chain, q), k,
                              p_world);
}

namespace {

using nlohmann::ordered_json;

ordered_json vec3_json(const Vec3& v) { return {v[0], v[1], v[2]}; }

Vec3 vec3_from(const ordered_json& j, const char* field) {
  if (!j.is_array() || j.size() != 3)
    throw std::runtime_error(std::string("chain file: field '") + field +
                             "' must be a 3-element array");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

ordered_json pose_json(const Pose& p) {
  ordered_json j;
  ordered_json r = ordered_json::array();
  for (int i = 0; i < 3; ++i)
    for (int c = 0; c < 3; ++c) r.push_back(p.rotation(i, c));
  j["rotation"] = r;
  j["translation"] = vec3_json(p.translation);
  return j;
}

Pose pose_from(const ordered_json& j) {
  Pose p;
  if (j.contains("rotation")) {
    const auto& r = j.at("rotation");
    if (!r.is_array() || r.size() != 9)
      throw std::runtime_error(
          "chain file: pose rotation must be a 9-element row-major array");
    for (int i = 0; i < 3; ++i)
      for (int c = 0; c < 3; ++c) p.rotation(i, c) = r[3 * i + c].get<double>();
  }
  if (j.contains("translation"))
    p.translation = vec3_from(j.at("translation"), "translation");
  p.validate();
  return p;
}

ordered_json shape_json(const geometry::Shape& shape,
                        const std::string& mesh_path) {
  ordered_json j;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, geometry::Sphere>) {
          j["type"] = "sphere";
          j["center"] = vec3_json(s.center);
          j["radius"] = s.radius;
        } else if constexpr (std::is_same_v<T, geometry::Capsule>) {
          j["type"] = "capsule";
          j["endpoint_a"] = vec3_json(s.endpoint_a);
          j["endpoint_b"] = vec3_json(s.endpoint_b);
          j["radius"] = s.radius;
        } else if constexpr (std::is_same_v<T, geometry::BoxShape>) {
          j["type"] = "box";
          j["center"] = vec3_json(s.center);
          j["half_extents"] = vec3_json(s.half_extents);
        } else {
          j["type"] = "mesh";
          j["path"] = mesh_path;
        }
      },
      shape);
  return j;
}

std::string dir_of(const std::string& path) {
  const auto slash = path.find_last_of('/');
  return slash == std::string::npos ? std::string(".") : path.substr(0, slash);
}

geometry::Shape shape_from(const ordered_json& j, const std::string& base_dir,
                           std::string* mesh_path) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "sphere") {
    geometry::Sphere s;
    s.center = vec3_from(j.at("center"), "center");
    s.radius = j.at("radius").get<double>();
    return s;
  }
  if (type == "capsule") {
    geometry::Capsule s;
    s.endpoint_a = vec3_from(j.at("endpoint_a"), "endpoint_a");
    s.endpoint_b = vec3_from(j.at("endpoint_b"), "endpoint_b");
    s.radius = j.at("radius").get<double>();
    return s;
  }
  if (type == "box") {
    geometry::BoxShape s;
    s.center = vec3_from(j.at("center"), "center");
    s.half_extents = vec3_from(j.at("half_extents"), "half_extents");
    return s;
  }
  if (type == "mesh") {
    *mesh_path = j.at("path").get<std::string>();
    const std::string full = mesh_path->front() == '/'
                                 ? *mesh_path
                                 : base_dir + "/" + *mesh_path;
    return geometry::load_mesh(full);
  }
  throw std::runtime_error("chain file: unknown shape type '" + type + "'");
}

}  // namespace

std::string chain_to_json_string(const KinematicChain& chain) {
  chain.validate();
  ordered_json j;
  j["format"] = "chainsdf.chain";
  j["version"] = 1;
  j["convention"] =
      chain.convention == DhConvention::Classic ? "classic" : "modified";
  j["rows"] = ordered_json::array();
  for (const auto& row : chain.rows) {
    ordered_json r;
    r["a"] = row.a;
    r["d"] = row.d;
    r["alpha"] = row.alpha;
    r["theta_offset"] = row.theta_offset;
    r["kind"] = row.kind == JointKind::Revolute ? "revolute" : "fixed";
    j["rows"].push_back(r);
  }
  j["q_min"] = std::vector<double>(chain.q_min.begin(), chain.q_min.end());
  j["q_max"] = std::vector<double>(chain.q_max.begin(), chain.q_max.end());
  if (chain.ee_frame >= 0) j["ee_frame"] = chain.ee_frame;
  j["attachments"] = ordered_json::array();
  for (const auto& att : chain.attachments) {
    ordered_json a;
    a["frame"] = att.frame;
    a["shape"] = shape_json(att.shape, att.mesh_path);
    a["local_pose"] = pose_json(att.local_pose);
    j["attachments"].push_back(a);
  }
  return j.dump(2) + "\n";
}

KinematicChain chain_from_json_string(const std::string& text,
                                      const std::string& base_dir) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("chain file: ") + e.what());
  }
  if (j.value("format", "") != "chainsdf.chain")
    throw std::runtime_error("chain file: missing 'chainsdf.chain' header");
  if (j.value("version", 0) != 1)
    throw std::runtime_error("chain file: unsupported version");
  KinematicChain chain;
  const std::string conv = j.at("convention").get<std::string>();
  if (conv == "classic")
    chain.convention = DhConvention::Classic;
  else if (conv == "modified")
    chain.convention = DhConvention::Modified;
  else
    throw std::runtime_error("chain file: unknown convention '" + conv + "'");
  for (const auto& r : j.at("rows")) {
    DhRow row;
    row.a = r.at("a").get<double>();
    row.d = r.at("d").get<double>();
    row.alpha = r.at("alpha").get<double>();
    row.theta_offset = r.at("theta_offset").get<double>();
    const std::string kind = r.at("kind").get<std::string>();
    if (kind == "revolute")
      row.kind = JointKind::Revolute;
    else if (kind == "fixed")
      row.kind = JointKind::Fixed;
    else
      throw std::runtime_error("chain file: unknown joint kind '" + kind +
                               "'");
    chain.rows.push_back(row);
  }
  const auto qmin = j.at("q_min").get<std::vector<double>>();
  const auto qmax = j.at("q_max").get<std::vector<double>>();
  chain.q_min = Eigen::Map<const VecX>(qmin.data(), qmin.size());
  chain.q_max = Eigen::Map<const VecX>(qmax.data(), qmax.size());
  chain.ee_frame = j.value("ee_frame", -1);
  if (j.contains("attachments")) {
    for (const auto& a : j.at("attachments")) {
      Attachment att;
      att.frame = a.at("frame").get<int>();
      att.shape = shape_from(a.at("shape"), base_dir, &att.mesh_path);
      if (a.contains("local_pose"))
        att.local_pose = pose_from(a.at("local_pose"));
      chain.attachments.push_back(att);
    }
  }
  chain.validate();
  return chain;
}

KinematicChain load_chain_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_chain_json: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return chain_from_json_string(text, dir_of(path));
}

void save_chain_json(const KinematicChain& chain, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_chain_json: cannot open " + path);
  out << chain_to_json_string(chain);
}

}  // namespace chainsdf::kinematics
