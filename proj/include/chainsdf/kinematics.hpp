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

#ifndef CHAINSDF_KINEMATICS_HPP_
#define CHAINSDF_KINEMATICS_HPP_

#include <string>
#include <vector>

#include "chainsdf/core.hpp"
#include "chainsdf/geometry.hpp"

namespace chainsdf::kinematics {

enum class JointKind { Revolute, Fixed };

/// Interpretation of a DH row.
///  Classic:  Rot_z(theta) Trans_z(d) Trans_x(a) Rot_x(alpha)
///  Modified: Rot_x(alpha) Trans_x(a) Rot_z(theta) Trans_z(d)
/// (modified is the Craig convention used by published Franka parameters).
enum class DhConvention { Classic, Modified };

struct DhRow {
  double a = 0.0;             // link length, m
  double d = 0.0;             // link offset, m
  double alpha = 0.0;         // twist, rad
  double theta_offset = 0.0;  // rad
  JointKind kind = JointKind::Revolute;
};

/// Rigid transform. rotation stays orthonormal with unit determinant.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return {}; }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Vec3 apply_inverse(const Vec3& p) const {
    return rotation.transpose() * (p - translation);
  }
  Pose compose(const Pose& other) const {
    return {rotation * other.rotation,
            rotation * other.translation + translation};
  }
  Pose inverse() const {
    return {rotation.transpose(), -(rotation.transpose() * translation)};
  }

  /// Orthonormality drift (max of |R^T R - I| and |det R - 1|).
  double orthonormality_error() const;
  void validate() const;
};

/// Geometry attached to a chain frame, posed in that frame.
struct Attachment {
  int frame = 1;              // 1-based frame index; 0 is the base
  geometry::Shape shape;
  Pose local_pose;            // shape coordinates -> frame coordinates
  std::string mesh_path;      // nonempty when `shape` came from a mesh file
};

struct KinematicChain {
  DhConvention convention = DhConvention::Classic;
  std::vector<DhRow> rows;
  VecX q_min, q_max;          // per revolute joint, in row order
  std::vector<Attachment> attachments;
  int ee_frame = -1;          // -1: last frame

  int num_frames() const { return static_cast<int>(rows.size()); }
  /// Number of actuated joints C (revolute rows).
  int dof() const;
  int end_effector_frame() const {
    return ee_frame >= 0 ? ee_frame : num_frames();
  }
  void validate() const;
};

/// Single-row DH transform; q is ignored for fixed rows.
Pose dh_transform(const DhRow& row, DhConvention convention, double q);

/// Base-to-frame poses for frames 0..K (frame 0 is the base identity).
std::vector<Pose> forward_kinematics(const KinematicChain& chain,
                                     const VecX& q);

/// FK with the per-joint world axes/origins needed for Jacobians.
struct FkResult {
  std::vector<Pose> frames;          // size K+1
  std::vector<Vec3> joint_axis;      // per revolute joint, world z axis
  std::vector<Vec3> joint_origin;    // per revolute joint, world origin
  std::vector<int> joint_of_row;     // row -> joint index, -1 for fixed
};

FkResult forward_kinematics_full(const KinematicChain& chain, const VecX& q);

/// World point expressed in frame k: R_k^T (p - t_k).
Vec3 point_to_link_frame(const KinematicChain& chain, const VecX& q, int k,
                         const Vec3& p_world);

/// d/dq of point_to_link_frame for a fixed world point; 3 x C. Columns for
/// joints beyond frame k are zero.
MatX point_frame_jacobian(const KinematicChain& chain, const VecX& q, int k,
                          const Vec3& p_world);

/// Same, reusing a precomputed FK (hot path for batched queries).
MatX point_frame_jacobian(const KinematicChain& chain, const FkResult& fk,
                          int k, const Vec3& p_world);

// Chain description file (JSON, versioned). Round-trips byte-identically.
// Mesh attachment paths resolve relative to base_dir (the chain file's
// directory when loading from disk).
KinematicChain load_chain_json(const std::string& path);
void save_chain_json(const KinematicChain& chain, const std::string& path);
std::string chain_to_json_string(const KinematicChain& chain);
KinematicChain chain_from_json_string(const std::string& text,
                                      const std::string& base_dir = ".");

}  // namespace chainsdf::kinematics

#endif  // CHAINSDF_KINEMATICS_HPP_
