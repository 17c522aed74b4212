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

#include "core/geometry.hpp"

#include <cmath>
#include <limits>

#include "core/errors.hpp"

namespace ocf {

namespace {

Eigen::Quaterniond normalized_or_throw(const Eigen::Quaterniond& q) {
  const double n = q.norm();
  if (!std::isfinite(n) || n < 1e-12) {
    throw DataError("rotation quaternion has zero or non-finite norm");
  }
  // Already unit to rounding: keep the bits so serialization round-trips.
  if (std::abs(n - 1.0) <= 8.0 * std::numeric_limits<double>::epsilon()) return q;
  return Eigen::Quaterniond(q.coeffs() / n);
}

double to_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

}  // namespace

RigidTransform::RigidTransform(const Eigen::Quaterniond& rotation, const Vec3& translation)
    : rotation_(normalized_or_throw(rotation)), translation_(translation) {}

RigidTransform RigidTransform::translation_only(double x, double y, double z) {
  return {Eigen::Quaterniond::Identity(), Vec3(x, y, z)};
}

RigidTransform RigidTransform::from_yaw(double yaw_rad, const Vec3& translation) {
  return {Eigen::Quaterniond(Eigen::AngleAxisd(yaw_rad, Vec3::UnitZ())), translation};
}

RigidTransform RigidTransform::inverse() const {
  const Eigen::Quaterniond inv = rotation_.conjugate();
  return {inv, -(inv * translation_)};
}

bool RigidTransform::operator==(const RigidTransform& other) const {
  return rotation_.coeffs() == other.rotation_.coeffs() && translation_ == other.translation_;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return {a.rotation() * b.rotation(), a.rotation() * b.translation() + a.translation()};
}

bool OrientedBox::operator==(const OrientedBox& other) const {
  return pose == other.pose && half_extents == other.half_extents &&
         instance_id == other.instance_id;
}

bool point_in_box(const Vec3& p, const OrientedBox& box, double margin) {
  const Vec3 local = box.pose.inverse().apply(p);
  for (int a = 0; a < 3; ++a) {
    if (std::abs(local[a]) > box.half_extents[a] + margin + kContainmentTolerance) return false;
  }
  return true;
}

OrientedBox transform_box(const RigidTransform& frame_from_world, const OrientedBox& box) {
  return {compose(frame_from_world, box.pose), box.half_extents, box.instance_id};
}

GridSpec::GridSpec(const Vec3& origin, const Vec3& voxel_size,
                   const std::array<std::int64_t, 3>& dims)
    : dims_(dims) {
  for (int a = 0; a < 3; ++a) {
    origin_[a] = to_f32(origin[a]);
    voxel_size_[a] = to_f32(voxel_size[a]);
    if (!std::isfinite(origin_[a]) || !std::isfinite(voxel_size_[a]) || voxel_size_[a] <= 0.0) {
      throw ConfigError("grid voxel size must be finite and positive, origin finite");
    }
    if (dims_[a] < 1 || dims_[a] > (std::int64_t{1} << 31)) {
      throw ConfigError("grid dims must be positive");
    }
  }
}

GridSpec GridSpec::default_spec() {
  return {Vec3(-51.2, -51.2, -3.0), Vec3(0.4, 0.4, 0.4), {256, 256, 16}};
}

Vec3 GridSpec::max_corner() const {
  return origin_ + voxel_size_.cwiseProduct(
                       Vec3(static_cast<double>(dims_[0]), static_cast<double>(dims_[1]),
                            static_cast<double>(dims_[2])));
}

bool GridSpec::contains(const Index3& idx) const {
  for (int a = 0; a < 3; ++a) {
    if (idx[a] < 0 || idx[a] >= dims_[a]) return false;
  }
  return true;
}

Index3 GridSpec::unlinear(std::size_t i) const {
  const auto li = static_cast<std::int64_t>(i);
  return {li % dims_[0], (li / dims_[0]) % dims_[1], li / (dims_[0] * dims_[1])};
}

Vec3 GridSpec::voxel_center(const Index3& idx) const {
  Vec3 c;
  for (int a = 0; a < 3; ++a) {
    c[a] = origin_[a] + (static_cast<double>(idx[a]) + 0.5) * voxel_size_[a];
  }
  return c;
}

bool GridSpec::operator==(const GridSpec& other) const {
  return origin_ == other.origin_ && voxel_size_ == other.voxel_size_ && dims_ == other.dims_;
}

std::optional<Index3> world_to_index(const GridSpec& spec, const Vec3& p) {
  Index3 idx{};
  for (int a = 0; a < 3; ++a) {
    const double lo = spec.origin()[a];
    const double size = spec.voxel_size()[a];
    double f = std::floor((p[a] - lo) / size);
    // The quotient can round across a face; settle on the cell whose
    // computed bounds actually bracket p.
    if (lo + f * size > p[a]) f -= 1.0;
    else if (lo + (f + 1.0) * size <= p[a]) f += 1.0;
    if (!(f >= 0.0) || f >= static_cast<double>(spec.dims()[a])) return std::nullopt;
    idx[a] = static_cast<std::int64_t>(f);
  }
  return idx;
}

}  // namespace ocf
