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

#ifndef CHAINSDF_CORE_HPP_
#define CHAINSDF_CORE_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace chainsdf {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// T x 3 point set, one point per row. All coordinates in meters.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, 3>;

/// Throws std::invalid_argument when a caller-facing precondition fails.
inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

/// Axis-aligned box, meters. max must dominate min componentwise.
struct AxisBox {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Ones();

  void validate() const {
    for (int i = 0; i < 3; ++i)
      require(max[i] > min[i], "AxisBox: max must exceed min on every axis");
  }

  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }

  /// Componentwise clamp of p onto the box.
  Vec3 clamp(const Vec3& p) const { return p.cwiseMax(min).cwiseMin(max); }

  Vec3 center() const { return 0.5 * (min + max); }
  Vec3 extents() const { return max - min; }
  double diagonal() const { return (max - min).norm(); }

  AxisBox expanded(double margin) const {
    return {min - Vec3::Constant(margin), max + Vec3::Constant(margin)};
  }

  /// Smallest cube with the same center that contains this box.
  AxisBox cube_hull() const {
    const double h = 0.5 * extents().maxCoeff();
    const Vec3 c = center();
    return {c - Vec3::Constant(h), c + Vec3::Constant(h)};
  }

  AxisBox merged(const AxisBox& other) const {
    return {min.cwiseMin(other.min), max.cwiseMax(other.max)};
  }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Deterministic random stream (xoshiro256**). The explicit sampler
/// implementations keep byte-level reproducibility independent of the
/// standard library in use.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = detail::splitmix64(sm);
  }

  /// Independent substream; stable under reordering of draws elsewhere.
  Rng stream(std::uint64_t id) const {
    std::uint64_t mix = s_[0] ^ (id * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull);
    return Rng(mix);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform in [0, 1).
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

  /// Standard normal via Box-Muller (pair cached).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  Vec3 normal3() {
    Vec3 v;
    for (int i = 0; i < 3; ++i) v[i] = normal();
    return v;
  }

  Vec3 uniform_in_box(const AxisBox& box) {
    Vec3 v;
    for (int i = 0; i < 3; ++i) v[i] = uniform(box.min[i], box.max[i]);
    return v;
  }

  /// Uniform direction on the unit sphere.
  Vec3 unit_vector() {
    while (true) {
      Vec3 v = normal3();
      const double n = v.norm();
      if (n > 1e-12) return v / n;
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace chainsdf

#endif  // CHAINSDF_CORE_HPP_
