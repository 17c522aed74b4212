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

#include <cmath>
#include <numbers>
#include <string>

#include "core/lidar_sim.hpp"

namespace ocf::testing {

inline double deg(double d) { return d * std::numbers::pi / 180.0; }

/// 64 azimuths by 16 elevations from -15 to +15 degrees, mounted 1.73 m up.
inline sim::SensorSpec default_sensor() {
  sim::SensorSpec s;
  s.n_azimuth = 64;
  for (int i = 0; i < 16; ++i) s.elevations_rad.push_back(deg(-15.0 + 2.0 * i));
  s.max_range = 60.0;
  s.ego_to_sensor = RigidTransform::translation_only(0.13, 0.07, 1.73);
  return s;
}

/// 300 azimuths by elevations from -45 to -5 degrees in 0.15 degree steps,
/// 15 m range. Ground returns fall less than a voxel apart everywhere in range.
inline sim::SensorSpec dense_sensor() {
  sim::SensorSpec s = default_sensor();
  s.n_azimuth = 300;
  s.elevations_rad.clear();
  for (int i = 0; i <= 266; ++i) s.elevations_rad.push_back(deg(-45.0 + 0.15 * i));
  s.max_range = 15.0;
  return s;
}

inline OrientedBox make_box(const std::string& id, const Vec3& center, const Vec3& half, double yaw = 0.0) {
  return {RigidTransform::from_yaw(yaw, center), half, id};
}

inline sim::EgoTrajectory linear_ego(const Vec3& velocity, double yaw_rate = 0.0,
                                     const Vec3& start = Vec3(0.011, -0.023, 0.0)) {
  sim::EgoTrajectory e;
  e.start = RigidTransform::translation_only(start.x(), start.y(), start.z());
  e.velocity = velocity;
  e.yaw_rate = yaw_rate;
  return e;
}

inline sim::SceneSpec static_room() {
  sim::SceneSpec s;
  s.sequence_id = "room";
  s.ground_z = 0.0;
  const double h = 1.45, cz = 1.47;
  s.static_boxes = {make_box("north", Vec3(0.31, 8.13, cz), Vec3(10.5, 0.3, h)),
                    make_box("south", Vec3(0.31, -7.87, cz), Vec3(10.5, 0.3, h)),
                    make_box("east", Vec3(10.53, 0.13, cz), Vec3(0.3, 7.7, h)),
                    make_box("west", Vec3(-9.93, 0.13, cz), Vec3(0.3, 7.7, h)),
                    make_box("pillar", Vec3(4.17, 3.09, 1.2), Vec3(0.5, 0.5, 1.15), 0.4)};
  s.sensor = default_sensor();
  s.ego = linear_ego(Vec3(1.5, 0.2, 0.0));
  return s;
}

inline sim::SceneSpec single_static_box() {
  sim::SceneSpec s;
  s.sequence_id = "box";
  s.static_boxes = {make_box("crate", Vec3(8.27, 2.11, 1.03), Vec3(1.6, 1.1, 0.95), 0.35)};
  s.sensor = default_sensor();
  s.ego = linear_ego(Vec3(2.0, 0.3, 0.0), 0.05);
  return s;
}

inline sim::SceneSpec one_moving_box() {
  sim::SceneSpec s;
  s.sequence_id = "mover";
  sim::DynamicBox car;
  car.box = make_box("car", Vec3(6.13, -4.21, 0.93), Vec3(2.1, 0.95, 0.85), 0.2);
  car.velocity = Vec3(4.0, 0.8, 0.0);
  s.dynamic_boxes = {car};
  s.sensor = default_sensor();
  s.ego = linear_ego(Vec3(1.0, 0.0, 0.0));
  return s;
}

inline sim::SceneSpec two_moving_boxes_ground() {
  sim::SceneSpec s;
  s.sequence_id = "traffic";
  s.ground_z = 0.0;
  sim::DynamicBox a, b;
  a.box = make_box("car_a", Vec3(7.09, 4.13, 0.91), Vec3(2.2, 0.95, 0.8), 0.0);
  a.velocity = Vec3(-3.0, 0.0, 0.0);
  b.box = make_box("car_b", Vec3(-9.17, -5.07, 1.03), Vec3(2.4, 1.05, 0.9), 0.1);
  b.velocity = Vec3(5.0, 0.5, 0.0);
  s.dynamic_boxes = {a, b};
  s.sensor = default_sensor();
  s.ego = linear_ego(Vec3(2.5, 0.0, 0.0), 0.02);
  return s;
}

inline sim::SceneSpec rotating_box() {
  sim::SceneSpec s;
  s.sequence_id = "spinner";
  sim::DynamicBox r;
  r.box = make_box("spinner", Vec3(-6.21, 5.13, 1.11), Vec3(1.9, 0.8, 1.0), 0.0);
  r.yaw_rate = 0.6;
  s.dynamic_boxes = {r};
  s.sensor = default_sensor();
  s.ego = linear_ego(Vec3(0.8, -0.4, 0.0));
  return s;
}

/// A long, tall wall ahead of a slowly moving ego; the region behind it is
/// never reached by any ray.
inline sim::SceneSpec occluding_wall() {
  sim::SceneSpec s;
  s.sequence_id = "wall";
  s.ground_z = 0.0;
  s.static_boxes = {make_box("wall", Vec3(15.13, 0.07, 3.0), Vec3(0.5, 30.0, 6.0))};
  s.sensor = default_sensor();
  s.ego = linear_ego(Vec3(1.0, 0.0, 0.0));
  return s;
}

/// A tall box driving straight away from the sensor at `voxels_per_frame`
/// voxels of `voxel` meters each frame, seen by a dense sensor.
inline sim::SceneSpec receding_box(double voxels_per_frame, double voxel) {
  sim::SceneSpec s;
  s.sequence_id = "tube";
  sim::DynamicBox truck;
  truck.box = make_box("truck", Vec3(6.07, 0.07, 1.91), Vec3(1.0, 0.9, 1.2));
  truck.velocity = Vec3(voxels_per_frame * voxel * 10.0, 0.0, 0.0);
  s.frame_rate = 10.0;
  s.dynamic_boxes = {truck};
  s.sensor.n_azimuth = 2880;
  for (int i = 0; i <= 124; ++i) s.sensor.elevations_rad.push_back(deg(-14.0 + 0.25 * i));
  s.sensor.max_range = 60.0;
  s.sensor.ego_to_sensor = RigidTransform::translation_only(0.0, 0.07, 1.73);
  s.ego = linear_ego(Vec3::Zero(), 0.0, Vec3::Zero());
  return s;
}

}  // namespace ocf::testing
