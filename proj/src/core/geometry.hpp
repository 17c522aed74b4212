/*
 * Copyright 2026 The ocfkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ocf {

using Vec3 = Eigen::Vector3d;
using PointList = std::vector<Vec3>;

/// SE(3) pose. The rotation is renormalized on construction and after every
/// composition so long pose chains do not drift.
class RigidTransform {
 public:
  RigidTransform() = default;
  RigidTransform(const Eigen::Quaterniond& rotation, const Vec3& translation);

  static RigidTransform identity() { return {}; }
  static RigidTransform translation_only(double x, double y, double z);
  static RigidTransform from_yaw(double yaw_rad, const Vec3& translation = Vec3::Zero());

  const Eigen::Quaterniond& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
  RigidTransform inverse() const;
  Eigen::Matrix3d rotation_matrix() const { return rotation_.toRotationMatrix(); }

  /// Bit-level equality of the stored quaternion and translation.
  bool operator==(const RigidTransform& other) const;

 private:
  Eigen::Quaterniond rotation_{Eigen::Quaterniond::Identity()};
  Vec3 translation_{Vec3::Zero()};
};

/// compose(a, b) maps p to a(b(p)).
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
inline RigidTransform invert(const RigidTransform& t) { return t.inverse(); }
inline Vec3 apply(const RigidTransform& t, const Vec3& p) { return t.apply(p); }

struct OrientedBox {
  RigidTransform pose;  // world-from-box
  Vec3 half_extents{Vec3::Ones()};
  std::string instance_id;

  bool operator==(const OrientedBox& other) const;
};

/// Absorbs float32 point storage and pose-chain rounding so that points
/// sampled on a face stay in.
inline constexpr double kContainmentTolerance = 1e-4;

/// Boundary-inclusive containment, up to kContainmentTolerance. `margin`
/// inflates every half extent.
bool point_in_box(const Vec3& p, const OrientedBox& box, double margin = 0.0);

/// Re-expresses a box under a change of frame: returns a box whose pose is
/// frame_from_world * world_from_box.
OrientedBox transform_box(const RigidTransform& frame_from_world, const OrientedBox& box);

using Index3 = std::array<std::int64_t, 3>;

/// Axis-aligned voxel lattice. Origin and voxel size are held at float32
/// precision, the precision of the dataset file header, so a grid
/// description survives serialization unchanged.
class GridSpec {
 public:
  GridSpec(const Vec3& origin, const Vec3& voxel_size, const std::array<std::int64_t, 3>& dims);

  /// 256 x 256 x 16 voxels of 0.4 m spanning [-51.2, 51.2] x [-51.2, 51.2] x [-3.0, 3.4].
  static GridSpec default_spec();

  const Vec3& origin() const { return origin_; }
  const Vec3& voxel_size() const { return voxel_size_; }
  const std::array<std::int64_t, 3>& dims() const { return dims_; }
  std::int64_t nx() const { return dims_[0]; }
  std::int64_t ny() const { return dims_[1]; }
  std::int64_t nz() const { return dims_[2]; }
  std::size_t voxel_count() const {
    return static_cast<std::size_t>(dims_[0] * dims_[1] * dims_[2]);
  }
  Vec3 max_corner() const;

  bool contains(const Index3& idx) const;
  /// x fastest, then y, then z.
  std::size_t linear(const Index3& idx) const {
    return static_cast<std::size_t>(idx[0] + dims_[0] * (idx[1] + dims_[1] * idx[2]));
  }
  Index3 unlinear(std::size_t i) const;
  Vec3 voxel_center(const Index3& idx) const;

  bool operator==(const GridSpec& other) const;
  bool operator!=(const GridSpec& other) const { return !(*this == other); }

 private:
  Vec3 origin_;
  Vec3 voxel_size_;
  std::array<std::int64_t, 3> dims_;
};

/// Half-open [lo, hi) per voxel; absent when p lies outside the grid.
std::optional<Index3> world_to_index(const GridSpec& spec, const Vec3& p);

}  // namespace ocf
