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

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "core/geometry.hpp"

namespace ocf {

/// One LiDAR scan. Points are in the sensor frame.
struct LidarSweep {
  std::int64_t frame_index = 0;
  double timestamp = 0.0;
  PointList points;
  RigidTransform ego_pose;  // world-from-ego
  Vec3 sensor_origin{Vec3::Zero()};  // ego frame

  bool operator==(const LidarSweep& other) const;
};

struct InstanceBoxTrack {
  std::string instance_id;
  std::map<std::int64_t, OrientedBox> entries;  // frame_index -> world-from-box

  bool operator==(const InstanceBoxTrack& other) const = default;
};

struct RawSequence {
  std::string sequence_id;
  std::vector<LidarSweep> sweeps;
  std::vector<InstanceBoxTrack> tracks;
  RigidTransform ego_to_sensor;

  std::int64_t first_frame() const { return sweeps.front().frame_index; }
  std::int64_t last_frame() const { return sweeps.back().frame_index; }
  bool has_frame(std::int64_t frame) const {
    return !sweeps.empty() && frame >= first_frame() && frame <= last_frame();
  }
  /// Throws RangeError when the frame is absent.
  const LidarSweep& sweep(std::int64_t frame) const;

  bool operator==(const RawSequence& other) const;
};

/// Checks the sequence invariants; throws ConsistencyError or DataError.
void validate(const RawSequence& seq);

/// Reads a sequence directory:
///   manifest.json   sequence_id, frames [{frame_index, timestamp?}], ego_to_sensor
///   poses.json      [{frame_index, quaternion [w,x,y,z], translation}]  world-from-ego
///   boxes.json      [{frame_index, boxes [{instance_id, center, quaternion, half_extents}]}]
///   points/NNNNNN.bin  little-endian float32 xyz triples, sensor frame
/// Missing timestamps default to frame_index * 0.1 s.
RawSequence load_sequence(const std::filesystem::path& dir);

/// Writes the layout read by load_sequence. Points are stored as float32, so
/// the round trip is exact for float-representable coordinates.
void save_sequence(const RawSequence& seq, const std::filesystem::path& dir);

/// Rounds every point coordinate to float32, the on-disk precision.
RawSequence quantize_points(RawSequence seq);

/// True when the directory holds a sequence manifest.
bool is_sequence_dir(const std::filesystem::path& dir);

/// Sequence directories under `root` (or `root` itself when it is one),
/// sorted by path.
std::vector<std::filesystem::path> list_sequence_dirs(const std::filesystem::path& root);

}  // namespace ocf
