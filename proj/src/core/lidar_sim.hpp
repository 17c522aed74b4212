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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/geometry.hpp"
#include "core/grids.hpp"
#include "core/raw_ingest.hpp"

namespace ocf::sim {

struct DynamicBox {
  OrientedBox box;  // pose at t = 0
  Vec3 velocity{Vec3::Zero()};  // m/s, world frame
  double yaw_rate = 0.0;        // rad/s about the box's vertical axis
};

struct SensorSpec {
  int n_azimuth = 64;
  std::vector<double> elevations_rad;
  double max_range = 60.0;
  RigidTransform ego_to_sensor;
  /// Gaussian range noise, off when 0.
  double range_noise_sigma = 0.0;
  std::uint64_t noise_seed = 0;
};

/// Either one pose per frame, or constant linear and yaw velocity from a
/// start pose.
struct EgoTrajectory {
  std::vector<RigidTransform> poses;
  RigidTransform start;
  Vec3 velocity{Vec3::Zero()};
  double yaw_rate = 0.0;

  bool explicit_poses() const { return !poses.empty(); }
};

struct SceneSpec {
  std::string sequence_id = "sim";
  std::optional<double> ground_z;
  std::vector<OrientedBox> static_boxes;
  std::vector<DynamicBox> dynamic_boxes;
  SensorSpec sensor;
  EgoTrajectory ego;
  double frame_rate = 10.0;

  /// Throws ConfigError when the invariants fail.
  void validate() const;
  double time_of(std::int64_t frame) const { return static_cast<double>(frame) / frame_rate; }
  RigidTransform ego_pose(std::int64_t frame) const;
  /// World-from-box of dynamic box `i` at `frame`.
  RigidTransform dynamic_pose(std::size_t i, std::int64_t frame) const;
};

SceneSpec scene_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SceneSpec& scene);

struct Hit {
  enum class Kind : std::uint8_t { kGround, kStaticBox, kDynamicBox };
  Kind kind;
  std::size_t index = 0;  // box index for box hits
};

struct SimulatedSweep {
  LidarSweep sweep;
  std::vector<Hit> hits;  // parallel to sweep.points
};

/// Casts every (azimuth, elevation) ray from the sensor; the nearest hit on
/// the ground plane or a box within max_range becomes a sensor-frame return.
SimulatedSweep simulate_sweep_detailed(const SceneSpec& scene, std::int64_t frame);
LidarSweep simulate_sweep(const SceneSpec& scene, std::int64_t frame);

/// Frames 0..n_frames-1 with one track per dynamic box holding its exact pose
/// at every frame.
RawSequence simulate_sequence(const SceneSpec& scene, std::int64_t n_frames);

/// Unsigned distance from a world point to the nearest scene surface at
/// `frame` (ground plane or box faces).
double surface_distance(const SceneSpec& scene, std::int64_t frame, const Vec3& world_point);

/// Distance from a world point to the surface of one box.
double box_surface_distance(const OrientedBox& box, const Vec3& world_point);

/// OCCUPIED where the voxel center (in the t0 ego frame) lies within half
/// the band thickness 1.5 * voxel size of a scene surface at `frame`.
OccupancyGrid analytic_occupancy(const SceneSpec& scene, const GridSpec& spec, std::int64_t frame,
                                 const RigidTransform& ego_pose_t0);

/// Voxels touched by the simulated ray segments of `window`, each segment
/// running from its frame's sensor origin to its return. Returns from
/// dynamic boxes are first carried rigidly to the box pose at
/// `target_frame` (unless `synchronize` is false). Segments are sampled on a
/// uniform step plus the midpoint of every interval between face crossings,
/// so every voxel whose interior a segment crosses is found.
std::vector<std::uint8_t> observed_voxels(const SceneSpec& scene, const GridSpec& spec,
                                          std::span<const std::int64_t> window,
                                          std::int64_t target_frame,
                                          const RigidTransform& ego_pose_t0,
                                          bool synchronize = true);

}  // namespace ocf::sim
