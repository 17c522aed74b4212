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

#include "core/lidar_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <set>

#include "core/errors.hpp"
#include "core/io_util.hpp"

namespace ocf::sim {

using nlohmann::json;

namespace {

constexpr double kMinHitDistance = 1e-9;

/// Entry parameter of the ray into the box, if any, beyond kMinHitDistance.
std::optional<double> intersect_box(const OrientedBox& box, const Vec3& origin, const Vec3& dir) {
  const RigidTransform inv = box.pose.inverse();
  const Vec3 o = inv.apply(origin);
  const Vec3 d = inv.rotation() * dir;
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    const double h = box.half_extents[a];
    if (std::abs(d[a]) < 1e-15) {
      if (std::abs(o[a]) > h) return std::nullopt;
      continue;
    }
    double t1 = (-h - o[a]) / d[a];
    double t2 = (h - o[a]) / d[a];
    if (t1 > t2) std::swap(t1, t2);
    t_near = std::max(t_near, t1);
    t_far = std::min(t_far, t2);
    if (t_near > t_far) return std::nullopt;
  }
  if (t_near > kMinHitDistance) return t_near;
  return std::nullopt;
}

double gaussian(std::mt19937_64& engine) {
  // Box-Muller on raw engine output keeps noise identical across platforms.
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  const double u1 = (static_cast<double>(engine() >> 11) + 0.5) * kScale;
  const double u2 = static_cast<double>(engine() >> 11) * kScale;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

OrientedBox box_from_json(const json& j, std::string_view what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + ": expected object");
  OrientedBox b;
  b.instance_id = j.value("instance_id", std::string());
  const Vec3 center = io::vec3_from_json(j.value("center", json()), std::string(what) + ".center");
  Eigen::Quaterniond q = Eigen::Quaterniond::Identity();
  if (j.contains("quaternion")) q = io::quat_from_json(j["quaternion"], std::string(what) + ".quaternion");
  else if (j.contains("yaw")) q = Eigen::AngleAxisd(j["yaw"].get<double>(), Vec3::UnitZ());
  b.pose = RigidTransform(q, center);
  b.half_extents = io::vec3_from_json(j.value("half_extents", json()), std::string(what) + ".half_extents");
  return b;
}

json box_to_json(const OrientedBox& b) {
  const auto& q = b.pose.rotation();
  return {{"instance_id", b.instance_id},
          {"center", io::to_json(b.pose.translation())},
          {"quaternion", {q.w(), q.x(), q.y(), q.z()}},
          {"half_extents", io::to_json(b.half_extents)}};
}

}  // namespace

void SceneSpec::validate() const {
  if (!(frame_rate > 0.0)) throw ConfigError("frame_rate must be positive");
  if (!(sensor.max_range > 0.0)) throw ConfigError("sensor.max_range must be positive");
  if (sensor.n_azimuth < 1) throw ConfigError("sensor.n_azimuth must be at least 1");
  if (sensor.range_noise_sigma < 0.0) throw ConfigError("range noise sigma must be >= 0");
  std::set<std::string> ids;
  for (const auto& d : dynamic_boxes) {
    if (!ids.insert(d.box.instance_id).second) {
      throw ConfigError("duplicate dynamic box id '" + d.box.instance_id + "'");
    }
  }
  auto check_box = [](const OrientedBox& b) {
    if ((b.half_extents.array() <= 0.0).any()) throw ConfigError("box half extents must be positive");
  };
  for (const auto& b : static_boxes) check_box(b);
  for (const auto& d : dynamic_boxes) check_box(d.box);
}

RigidTransform SceneSpec::ego_pose(std::int64_t frame) const {
  if (ego.explicit_poses()) {
    if (frame < 0 || frame >= static_cast<std::int64_t>(ego.poses.size())) {
      throw RangeError("frame " + std::to_string(frame) + " is outside the ego trajectory");
    }
    return ego.poses[static_cast<std::size_t>(frame)];
  }
  const double t = time_of(frame);
  return {Eigen::Quaterniond(Eigen::AngleAxisd(ego.yaw_rate * t, Vec3::UnitZ())) * ego.start.rotation(),
          ego.start.translation() + ego.velocity * t};
}

RigidTransform SceneSpec::dynamic_pose(std::size_t i, std::int64_t frame) const {
  const DynamicBox& d = dynamic_boxes.at(i);
  const double t = time_of(frame);
  return {Eigen::Quaterniond(Eigen::AngleAxisd(d.yaw_rate * t, Vec3::UnitZ())) * d.box.pose.rotation(),
          d.box.pose.translation() + d.velocity * t};
}

SceneSpec scene_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("scene: expected a JSON object");
  SceneSpec s;
  try {
    s.sequence_id = j.value("sequence_id", s.sequence_id);
    s.frame_rate = j.value("frame_rate", s.frame_rate);
    if (j.contains("ground") && !j["ground"].is_null()) s.ground_z = j["ground"].at("z").get<double>();
    for (const auto& b : j.value("static_boxes", json::array())) {
      s.static_boxes.push_back(box_from_json(b, "static_boxes[]"));
    }
    for (const auto& b : j.value("dynamic_boxes", json::array())) {
      DynamicBox d;
      d.box = box_from_json(b, "dynamic_boxes[]");
      if (b.contains("velocity")) d.velocity = io::vec3_from_json(b["velocity"], "velocity");
      d.yaw_rate = b.value("yaw_rate", 0.0);
      s.dynamic_boxes.push_back(std::move(d));
    }
    if (j.contains("sensor")) {
      const json& sj = j["sensor"];
      s.sensor.n_azimuth = sj.value("n_azimuth", s.sensor.n_azimuth);
      for (const auto& e : sj.value("elevations_deg", json::array())) {
        s.sensor.elevations_rad.push_back(e.get<double>() * std::numbers::pi / 180.0);
      }
      s.sensor.max_range = sj.value("max_range", s.sensor.max_range);
      if (sj.contains("ego_to_sensor")) {
        s.sensor.ego_to_sensor = io::transform_from_json(sj["ego_to_sensor"], "sensor.ego_to_sensor");
      }
      s.sensor.range_noise_sigma = sj.value("range_noise_sigma", 0.0);
      s.sensor.noise_seed = sj.value("noise_seed", std::uint64_t{0});
    }
    if (j.contains("ego_trajectory")) {
      const json& e = j["ego_trajectory"];
      if (e.is_array()) {
        for (const auto& p : e) s.ego.poses.push_back(io::transform_from_json(p, "ego_trajectory[]"));
      } else {
        if (e.contains("start")) s.ego.start = io::transform_from_json(e["start"], "ego_trajectory.start");
        if (e.contains("velocity")) s.ego.velocity = io::vec3_from_json(e["velocity"], "ego_trajectory.velocity");
        s.ego.yaw_rate = e.value("yaw_rate", 0.0);
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scene: ") + e.what());
  } catch (const FormatError& e) {
    throw ConfigError(std::string("scene: ") + e.what());
  } catch (const DataError& e) {
    throw ConfigError(std::string("scene: ") + e.what());
  }
  s.validate();
  return s;
}

json to_json(const SceneSpec& s) {
  json j;
  j["sequence_id"] = s.sequence_id;
  j["frame_rate"] = s.frame_rate;
  j["ground"] = s.ground_z ? json{{"z", *s.ground_z}} : json(nullptr);
  j["static_boxes"] = json::array();
  for (const auto& b : s.static_boxes) j["static_boxes"].push_back(box_to_json(b));
  j["dynamic_boxes"] = json::array();
  for (const auto& d : s.dynamic_boxes) {
    json b = box_to_json(d.box);
    b["velocity"] = io::to_json(d.velocity);
    b["yaw_rate"] = d.yaw_rate;
    j["dynamic_boxes"].push_back(std::move(b));
  }
  json elev = json::array();
  for (const double e : s.sensor.elevations_rad) elev.push_back(e * 180.0 / std::numbers::pi);
  j["sensor"] = {{"n_azimuth", s.sensor.n_azimuth},
                 {"elevations_deg", elev},
                 {"max_range", s.sensor.max_range},
                 {"ego_to_sensor", io::to_json(s.sensor.ego_to_sensor)},
                 {"range_noise_sigma", s.sensor.range_noise_sigma},
                 {"noise_seed", s.sensor.noise_seed}};
  if (s.ego.explicit_poses()) {
    j["ego_trajectory"] = json::array();
    for (const auto& p : s.ego.poses) j["ego_trajectory"].push_back(io::to_json(p));
  } else {
    j["ego_trajectory"] = {{"start", io::to_json(s.ego.start)},
                           {"velocity", io::to_json(s.ego.velocity)},
                           {"yaw_rate", s.ego.yaw_rate}};
  }
  return j;
}

SimulatedSweep simulate_sweep_detailed(const SceneSpec& scene, std::int64_t frame) {
  scene.validate();
  const RigidTransform world_from_ego = scene.ego_pose(frame);
  const RigidTransform world_from_sensor = compose(world_from_ego, scene.sensor.ego_to_sensor);
  const Vec3 origin = world_from_sensor.translation();
  const Eigen::Matrix3d rot = world_from_sensor.rotation_matrix();

  std::vector<OrientedBox> dynamic;
  dynamic.reserve(scene.dynamic_boxes.size());
  for (std::size_t i = 0; i < scene.dynamic_boxes.size(); ++i) {
    dynamic.push_back({scene.dynamic_pose(i, frame), scene.dynamic_boxes[i].box.half_extents,
                       scene.dynamic_boxes[i].box.instance_id});
  }
  std::mt19937_64 engine(scene.sensor.noise_seed ^ (0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(frame + 1)));

  SimulatedSweep out;
  auto& sweep = out.sweep;
  sweep.frame_index = frame;
  sweep.timestamp = scene.time_of(frame);
  sweep.ego_pose = world_from_ego;
  sweep.sensor_origin = scene.sensor.ego_to_sensor.translation();

  const int n_az = scene.sensor.n_azimuth;
  for (const double elev : scene.sensor.elevations_rad) {
    for (int i = 0; i < n_az; ++i) {
      const double az = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n_az);
      const Vec3 dir_sensor(std::cos(elev) * std::cos(az), std::cos(elev) * std::sin(az), std::sin(elev));
      const Vec3 dir = rot * dir_sensor;

      double best = scene.sensor.max_range;
      std::optional<Hit> hit;
      if (scene.ground_z && std::abs(dir.z()) > 1e-15) {
        const double t = (*scene.ground_z - origin.z()) / dir.z();
        if (t > kMinHitDistance && t <= best) {
          best = t;
          hit = Hit{Hit::Kind::kGround, 0};
        }
      }
      for (std::size_t b = 0; b < scene.static_boxes.size(); ++b) {
        const auto t = intersect_box(scene.static_boxes[b], origin, dir);
        if (t && *t <= best) {
          best = *t;
          hit = Hit{Hit::Kind::kStaticBox, b};
        }
      }
      for (std::size_t b = 0; b < dynamic.size(); ++b) {
        const auto t = intersect_box(dynamic[b], origin, dir);
        if (t && *t <= best) {
          best = *t;
          hit = Hit{Hit::Kind::kDynamicBox, b};
        }
      }
      if (!hit) continue;
      double range = best;
      if (scene.sensor.range_noise_sigma > 0.0) {
        range = std::max(0.0, range + scene.sensor.range_noise_sigma * gaussian(engine));
      }
      sweep.points.push_back(dir_sensor * range);
      out.hits.push_back(*hit);
    }
  }
  return out;
}

LidarSweep simulate_sweep(const SceneSpec& scene, std::int64_t frame) {
  return simulate_sweep_detailed(scene, frame).sweep;
}

RawSequence simulate_sequence(const SceneSpec& scene, std::int64_t n_frames) {
  if (n_frames < 1) throw ConfigError("n_frames must be at least 1");
  RawSequence seq;
  seq.sequence_id = scene.sequence_id;
  seq.ego_to_sensor = scene.sensor.ego_to_sensor;
  for (std::int64_t f = 0; f < n_frames; ++f) seq.sweeps.push_back(simulate_sweep(scene, f));
  for (std::size_t i = 0; i < scene.dynamic_boxes.size(); ++i) {
    InstanceBoxTrack track;
    track.instance_id = scene.dynamic_boxes[i].box.instance_id;
    for (std::int64_t f = 0; f < n_frames; ++f) {
      track.entries[f] = {scene.dynamic_pose(i, f), scene.dynamic_boxes[i].box.half_extents,
                          track.instance_id};
    }
    seq.tracks.push_back(std::move(track));
  }
  std::sort(seq.tracks.begin(), seq.tracks.end(),
            [](const auto& a, const auto& b) { return a.instance_id < b.instance_id; });
  return seq;
}

double box_surface_distance(const OrientedBox& box, const Vec3& world_point) {
  const Vec3 q = box.pose.inverse().apply(world_point).cwiseAbs() - box.half_extents;
  if ((q.array() <= 0.0).all()) return -q.maxCoeff();
  return q.cwiseMax(0.0).norm();
}

double surface_distance(const SceneSpec& scene, std::int64_t frame, const Vec3& p) {
  double best = std::numeric_limits<double>::infinity();
  if (scene.ground_z) best = std::abs(p.z() - *scene.ground_z);
  for (const auto& b : scene.static_boxes) best = std::min(best, box_surface_distance(b, p));
  for (std::size_t i = 0; i < scene.dynamic_boxes.size(); ++i) {
    const OrientedBox b{scene.dynamic_pose(i, frame), scene.dynamic_boxes[i].box.half_extents, {}};
    best = std::min(best, box_surface_distance(b, p));
  }
  return best;
}

OccupancyGrid analytic_occupancy(const SceneSpec& scene, const GridSpec& spec, std::int64_t frame,
                                 const RigidTransform& ego_pose_t0) {
  const double half_band = 0.5 * 1.5 * spec.voxel_size().minCoeff();
  std::vector<OrientedBox> boxes = scene.static_boxes;
  for (std::size_t i = 0; i < scene.dynamic_boxes.size(); ++i) {
    boxes.push_back({scene.dynamic_pose(i, frame), scene.dynamic_boxes[i].box.half_extents, {}});
  }
  const Eigen::Matrix3d r = ego_pose_t0.rotation_matrix();
  const Vec3& t = ego_pose_t0.translation();

  OccupancyGrid grid(spec, CellState::kFree);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec3 world = r * spec.voxel_center(spec.unlinear(i)) + t;
    bool occupied = scene.ground_z && std::abs(world.z() - *scene.ground_z) <= half_band;
    for (std::size_t b = 0; !occupied && b < boxes.size(); ++b) {
      // Cheap reject before the exact distance.
      if ((world - boxes[b].pose.translation()).norm() > boxes[b].half_extents.norm() + half_band) continue;
      occupied = box_surface_distance(boxes[b], world) <= half_band;
    }
    if (occupied) grid.set(i, CellState::kOccupied);
  }
  return grid;
}

std::vector<std::uint8_t> observed_voxels(const SceneSpec& scene, const GridSpec& spec,
                                          std::span<const std::int64_t> window,
                                          std::int64_t target_frame,
                                          const RigidTransform& ego_pose_t0, bool synchronize) {
  std::vector<std::uint8_t> seen(spec.voxel_count(), 0);
  const RigidTransform t0_from_world = ego_pose_t0.inverse();
  const double step = 0.25 * spec.voxel_size().minCoeff();
  const Vec3& lo = spec.origin();
  const Vec3& size = spec.voxel_size();

  auto mark = [&](const Vec3& p) {
    if (const auto idx = world_to_index(spec, p)) seen[spec.linear(*idx)] = 1;
  };
  std::vector<double> ts;
  auto sample_segment = [&](const Vec3& a, const Vec3& b) {
    const Vec3 d = b - a;
    ts.assign({0.0, 1.0});
    for (int ax = 0; ax < 3; ++ax) {
      if (d[ax] == 0.0) continue;
      const double k0 = std::ceil((std::min(a[ax], b[ax]) - lo[ax]) / size[ax]);
      const double k1 = std::floor((std::max(a[ax], b[ax]) - lo[ax]) / size[ax]);
      for (double k = k0; k <= k1; k += 1.0) {
        const double t = (lo[ax] + k * size[ax] - a[ax]) / d[ax];
        if (t > 0.0 && t < 1.0) ts.push_back(t);
      }
    }
    std::sort(ts.begin(), ts.end());
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
      if (ts[i + 1] > ts[i]) mark(a + 0.5 * (ts[i] + ts[i + 1]) * d);
    }
    const double len = d.norm();
    const auto n = static_cast<std::size_t>(std::ceil(len / step));
    for (std::size_t i = 0; i <= n; ++i) mark(a + (static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(n, 1))) * d);
  };

  for (const std::int64_t f : window) {
    const SimulatedSweep s = simulate_sweep_detailed(scene, f);
    const RigidTransform world_from_sensor = compose(s.sweep.ego_pose, scene.sensor.ego_to_sensor);
    const Vec3 origin = t0_from_world.apply(world_from_sensor.translation());
    for (std::size_t k = 0; k < s.sweep.points.size(); ++k) {
      Vec3 world = world_from_sensor.apply(s.sweep.points[k]);
      if (synchronize && s.hits[k].kind == Hit::Kind::kDynamicBox) {
        const std::size_t b = s.hits[k].index;
        world = compose(scene.dynamic_pose(b, target_frame), scene.dynamic_pose(b, f).inverse()).apply(world);
      }
      sample_segment(origin, t0_from_world.apply(world));
    }
  }
  return seen;
}

}  // namespace ocf::sim
