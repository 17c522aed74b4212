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

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "core/curation.hpp"
#include "core/errors.hpp"
#include "core/lidar_sim.hpp"
#include "core/occupancy.hpp"
#include "support/oracles.hpp"
#include "support/scenes.hpp"

using namespace ocf;
using ocf::testing::deg;
using ocf::testing::make_box;

namespace {

/// Distance from p to the surface of an axis-aligned-in-local-frame box,
/// written from scratch: outside, Euclidean distance to the solid; inside,
/// distance to the nearest face.
double oracle_box_distance(const Vec3& p, double yaw, const Vec3& c, const Vec3& h) {
  const auto inv = oracle::rigid_inverse(oracle::yaw_translate(yaw, c.x(), c.y(), c.z()));
  const auto l = oracle::apply(inv, {p.x(), p.y(), p.z()});
  double out2 = 0.0, in = 1e300;
  bool inside = true;
  for (int a = 0; a < 3; ++a) {
    const double e = std::abs(l[a]) - h[a];
    if (e > 0) {
      out2 += e * e;
      inside = false;
    }
    in = std::min(in, h[a] - std::abs(l[a]));
  }
  return inside ? in : std::sqrt(out2);
}

sim::SceneSpec one_ray_scene() {
  sim::SceneSpec s;
  s.static_boxes = {make_box("wall", Vec3(2.5, 0, 0), Vec3(0.5, 1, 1))};
  s.sensor.n_azimuth = 1;
  s.sensor.elevations_rad = {0.0};
  return s;
}

Vec3 world_point(const sim::SceneSpec& scene, std::int64_t frame, const Vec3& sensor_point) {
  return compose(scene.ego_pose(frame), scene.sensor.ego_to_sensor).apply(sensor_point);
}

}  // namespace

TEST_SUITE("lidar_sim") {

TEST_CASE("empty scene returns nothing") {
  sim::SceneSpec s;
  s.sensor = ocf::testing::default_sensor();
  CHECK(sim::simulate_sweep(s, 0).points.empty());
}

TEST_CASE("one horizontal ray at a box 2 m ahead") {
  const auto sweep = sim::simulate_sweep(one_ray_scene(), 0);
  REQUIRE(sweep.points.size() == 1);
  CHECK(std::abs(sweep.points[0].norm() - 2.0) <= 1e-9);
}

TEST_CASE("every return lies on a scene surface") {
  for (const auto& scene : {ocf::testing::two_moving_boxes_ground(), ocf::testing::static_room(),
                            ocf::testing::rotating_box()}) {
    for (const std::int64_t f : {0, 3}) {
      const auto d = sim::simulate_sweep_detailed(scene, f);
      CHECK(d.hits.size() == d.sweep.points.size());
      CHECK(!d.sweep.points.empty());
      for (const auto& p : d.sweep.points) CHECK(sim::surface_distance(scene, f, world_point(scene, f, p)) <= 1e-6);
    }
  }
}

TEST_CASE("returns respect max range") {
  sim::SceneSpec s = one_ray_scene();
  s.sensor.max_range = 1.5;
  CHECK(sim::simulate_sweep(s, 0).points.empty());
}

TEST_CASE("stationary static scene repeats its sweep") {
  sim::SceneSpec s = ocf::testing::static_room();
  s.ego = ocf::testing::linear_ego(Vec3::Zero());
  const RawSequence seq = sim::simulate_sequence(s, 2);
  CHECK(seq.sweeps[0].points == seq.sweeps[1].points);
}

TEST_CASE("moving ego: unified points of both sweeps lie on the same surfaces") {
  const sim::SceneSpec s = ocf::testing::static_room();
  const RawSequence seq = sim::simulate_sequence(s, 2);
  for (const std::int64_t f : {0, 1}) {
    const auto u = unify_frame(seq.sweep(f), seq.sweep(0).ego_pose, seq.ego_to_sensor);
    for (const auto& p : u.points) CHECK(sim::surface_distance(s, 0, s.ego_pose(0).apply(p)) <= 1e-6);
  }
}

TEST_CASE("box tracks hold the analytic pose") {
  sim::SceneSpec s;
  sim::DynamicBox car;
  car.box = make_box("car", Vec3(10, 0, 1), Vec3(2, 1, 1));
  car.velocity = Vec3(10, 0, 0);
  s.dynamic_boxes = {car};
  s.sensor = ocf::testing::default_sensor();
  const RawSequence seq = sim::simulate_sequence(s, 5);
  REQUIRE(seq.tracks.size() == 1);
  for (std::int64_t k = 0; k < 5; ++k) {
    CHECK((seq.tracks[0].entries.at(k).pose.translation() - Vec3(10.0 + static_cast<double>(k), 0, 1)).norm() <= 1e-12);
  }
  CHECK_NOTHROW(validate(seq));
}

TEST_CASE("rotating box turns at its yaw rate") {
  const auto s = ocf::testing::rotating_box();
  const auto pose = s.dynamic_pose(0, 5);
  const Eigen::Matrix3d r = pose.rotation_matrix();
  CHECK(std::abs(std::atan2(r(1, 0), r(0, 0)) - 0.6 * 0.5) <= 1e-12);
}

TEST_CASE("analytic occupancy: empty scene and ground slab") {
  const GridSpec spec = GridSpec::default_spec();
  sim::SceneSpec s;
  s.sensor = ocf::testing::default_sensor();
  CHECK(sim::analytic_occupancy(s, spec, 0, RigidTransform::identity()).count(CellState::kOccupied) == 0);

  s.ground_z = 0.0;
  const auto g = sim::analytic_occupancy(s, spec, 0, RigidTransform::identity());
  CHECK(g.count(CellState::kOccupied) == 256u * 256u);
  for (std::int64_t x = 0; x < 256; x += 37) {
    for (std::int64_t z = 0; z < 16; ++z) CHECK((g.at(Index3{x, 11, z}) == CellState::kOccupied) == (z == 7));
  }
}

TEST_CASE("analytic occupancy of a rotated box equals per-voxel distance evaluation") {
  const GridSpec spec(Vec3(-2, -2, -1), Vec3(0.25, 0.25, 0.25), {32, 32, 12});
  sim::SceneSpec s;
  s.sensor = ocf::testing::default_sensor();
  const Vec3 c(0.3, -0.2, 0.4), h(1.1, 0.6, 0.5);
  const double yaw = 0.7;
  s.static_boxes = {make_box("r", c, h, yaw)};
  const auto ego = RigidTransform::from_yaw(0.2, Vec3(0.1, 0.05, 0.0));
  const auto g = sim::analytic_occupancy(s, spec, 0, ego);
  std::size_t occupied = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3 w = ego.apply(spec.voxel_center(spec.unlinear(i)));
    const bool expected = oracle_box_distance(w, yaw, c, h) <= 0.75 * 0.25;
    occupied += expected;
    CHECK((g.at(i) == CellState::kOccupied) == expected);
  }
  CHECK(occupied > 100);
}

TEST_CASE("box_surface_distance agrees with the oracle") {
  const Vec3 c(1, 2, 0.5), h(2, 1, 0.5);
  const OrientedBox b = make_box("b", c, h, 0.3);
  for (const Vec3& p : {Vec3(1, 2, 0.5), Vec3(5, 2, 0.5), Vec3(1.2, 2.1, 0.6), Vec3(-3, -1, 4)}) {
    CHECK(std::abs(sim::box_surface_distance(b, p) - oracle_box_distance(p, 0.3, c, h)) <= 1e-12);
  }
}

TEST_CASE("observed voxels cover every ray's path") {
  const GridSpec spec = GridSpec::default_spec();
  const auto s = ocf::testing::single_static_box();
  const std::vector<std::int64_t> w{0};
  const auto seen = sim::observed_voxels(s, spec, w, 0, s.ego_pose(0));
  const RawSequence seq = sim::simulate_sequence(s, 1);
  const auto u = unify_frame(seq.sweep(0), seq.sweep(0).ego_pose, seq.ego_to_sensor);
  for (const auto& p : u.points) {
    for (const auto& idx : traverse_ray(spec, u.sensor_origin, p)) CHECK(seen[spec.linear(idx)] == 1);
    if (const auto end = world_to_index(spec, p)) CHECK(seen[spec.linear(*end)] == 1);
  }
}

TEST_CASE("space behind an occluding wall stays UNKNOWN") {
  const GridSpec spec = GridSpec::default_spec();
  const auto s = ocf::testing::occluding_wall();
  const RawSequence seq = sim::simulate_sequence(s, 5);
  const auto b = build_sample(seq, 2, 2, 2, spec);
  // Wall back face is at x = 15.63 in the world; ego at frame 2 is near x = 0.2.
  for (const auto& t : b.sample.targets) {
    std::size_t behind = 0, unknown = 0;
    for (std::int64_t x = 0; x < spec.nx(); ++x) {
      for (std::int64_t y = 96; y < 160; y += 8) {
        for (std::int64_t z = 0; z < spec.nz(); ++z) {
          const Index3 idx{x, y, z};
          if (s.ego_pose(2).apply(spec.voxel_center(idx)).x() < 17.0) continue;
          ++behind;
          unknown += t.at(idx) == CellState::kUnknown;
        }
      }
    }
    CHECK(behind > 0);
    CHECK(unknown == behind);
  }
}

TEST_CASE("range noise is seeded and off by default") {
  sim::SceneSpec s = ocf::testing::single_static_box();
  const auto clean = sim::simulate_sweep(s, 1);
  s.sensor.range_noise_sigma = 0.02;
  s.sensor.noise_seed = 4;
  const auto a = sim::simulate_sweep(s, 1);
  const auto b = sim::simulate_sweep(s, 1);
  CHECK(a.points == b.points);
  CHECK(a.points != clean.points);
  CHECK(a.points.size() == clean.points.size());
}

TEST_CASE("scene JSON round-trips") {
  const auto s = ocf::testing::two_moving_boxes_ground();
  const auto back = sim::scene_from_json(sim::to_json(s));
  CHECK(sim::to_json(back) == sim::to_json(s));
  CHECK(sim::simulate_sweep(back, 2).points == sim::simulate_sweep(s, 2).points);
}

TEST_CASE("scene JSON accepts yaw and degree elevations") {
  const nlohmann::json j = {
      {"sequence_id", "j"},
      {"ground", {{"z", 0.0}}},
      {"static_boxes", {{{"instance_id", "w"}, {"center", {5, 0, 1}}, {"yaw", 0.5}, {"half_extents", {1, 1, 1}}}}},
      {"sensor", {{"n_azimuth", 8}, {"elevations_deg", {-10, 0}}, {"max_range", 30}}},
      {"ego_trajectory", {{"velocity", {1, 0, 0}}}}};
  const auto s = sim::scene_from_json(j);
  CHECK(s.sequence_id == "j");
  CHECK(s.sensor.elevations_rad[0] == doctest::Approx(deg(-10)));
  CHECK(s.static_boxes[0].pose == RigidTransform::from_yaw(0.5, Vec3(5, 0, 1)));
  CHECK((s.ego_pose(3).translation() - Vec3(0.3, 0, 0)).norm() <= 1e-12);
}

TEST_CASE("invalid scenes are config errors") {
  sim::SceneSpec s = ocf::testing::two_moving_boxes_ground();
  s.dynamic_boxes[1].box.instance_id = s.dynamic_boxes[0].box.instance_id;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = ocf::testing::single_static_box();
  s.sensor.max_range = 0.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = ocf::testing::single_static_box();
  s.sensor.n_azimuth = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  CHECK_THROWS_AS(sim::scene_from_json(nlohmann::json::array()), ConfigError);
  CHECK_THROWS_AS(sim::simulate_sequence(ocf::testing::single_static_box(), 0), ConfigError);
}

}  // TEST_SUITE
