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

#include <map>
#include <span>
#include <string>
#include <vector>

#include "core/geometry.hpp"
#include "core/raw_ingest.hpp"

namespace ocf {

/// A sweep expressed in the t = 0 ego frame.
struct UnifiedSweep {
  std::int64_t frame_index = 0;
  PointList points;
  Vec3 sensor_origin{Vec3::Zero()};
};

/// Points go through inv(ego_pose_t0) * ego_pose * ego_to_sensor.
UnifiedSweep unify_frame(const LidarSweep& sweep, const RigidTransform& ego_pose_t0,
                         const RigidTransform& ego_to_sensor);

struct SegmentedSweep {
  std::int64_t frame_index = 0;
  PointList static_points;
  /// Points of each instance, still at the instance's pose in this frame.
  std::map<std::string, PointList> dynamic_points;
  Vec3 sensor_origin_unified{Vec3::Zero()};

  std::size_t point_count() const;
};

/// Splits points by box membership. A point inside several boxes goes to the
/// box with the nearest center, exact ties to the smallest instance id.
SegmentedSweep segment_sweep(const UnifiedSweep& sweep, std::span<const OrientedBox> boxes,
                             double box_margin = 0.0);

/// Re-poses points rigidly attached to a box: dst * inv(src) * p.
PointList sync_object(std::span<const Vec3> points, const RigidTransform& box_pose_src,
                      const RigidTransform& box_pose_dst);

/// All returns of one frame, cast from that frame's sensor origin.
struct RayBundle {
  std::int64_t frame_index = 0;
  Vec3 origin{Vec3::Zero()};
  PointList endpoints;  // static returns first, then synced dynamic returns
  std::size_t static_count = 0;
};

struct DroppedObject {
  std::string instance_id;
  std::int64_t source_frame = 0;
  std::size_t point_count = 0;
};

struct AggregationOptions {
  /// Re-pose dynamic points to the target frame. Off reproduces the naive
  /// superposition that smears moving objects into tubes.
  bool synchronize = true;
  /// Inflation added to every box half extent before point assignment.
  double box_margin = 0.0;
};

struct Aggregate {
  std::int64_t target_frame = 0;
  PointList static_points;
  std::map<std::string, PointList> dynamic_points;
  std::vector<Vec3> sensor_origins;  // one per window frame, window order
  std::vector<RayBundle> rays;       // one per window frame
  std::vector<DroppedObject> dropped;

  std::size_t point_count() const;
};

/// Box annotations of frame `frame` in the t0 ego frame, sorted by id.
std::vector<OrientedBox> boxes_in_t0_frame(const RawSequence& seq, std::int64_t frame,
                                           std::int64_t t0);

/// Per-frame segmentation of a window, shared across targets.
class SegmentedWindow {
 public:
  SegmentedWindow(const RawSequence& seq, std::span<const std::int64_t> window, std::int64_t t0,
                  const AggregationOptions& options = {});

  /// Static points plus per-instance points synced to `target`.
  /// Instances lacking an annotation at `target` are dropped.
  Aggregate aggregate(std::int64_t target) const;

  const std::vector<SegmentedSweep>& frames() const { return frames_; }

 private:
  const RawSequence* seq_;
  std::int64_t t0_;
  AggregationOptions options_;
  RigidTransform t0_from_world_;
  std::vector<SegmentedSweep> frames_;
};

/// Throws RangeError when the target or a window frame is absent.
Aggregate aggregate_to_target(const RawSequence& seq, std::span<const std::int64_t> window,
                              std::int64_t target, std::int64_t t0,
                              const AggregationOptions& options = {});

}  // namespace ocf
