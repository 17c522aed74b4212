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

#include <random>
#include <set>

#include "core/errors.hpp"
#include "core/lidar_sim.hpp"
#include "core/occupancy.hpp"
#include "support/oracles.hpp"
#include "support/scenes.hpp"

using namespace ocf;

namespace {

const GridSpec kUnit(Vec3::Zero(), Vec3::Ones(), {4, 4, 1});

/// Voxels met by 10^4 evenly spaced samples of the open segment, minus the
/// endpoint voxel.
std::set<Index3> sampled_voxels(const GridSpec& spec, const Vec3& a, const Vec3& b, int n = 10000) {
  std::set<Index3> out;
  const auto end = world_to_index(spec, b);
  for (int i = 1; i < n; ++i) {
    const auto idx = world_to_index(spec, a + (b - a) * (static_cast<double>(i) / n));
    if (idx && idx != end) out.insert(*idx);
  }
  return out;
}

Vec3 cell_lo(const GridSpec& spec, const Index3& c) {
  return spec.origin() + Vec3(c[0] * spec.voxel_size().x(), c[1] * spec.voxel_size().y(), c[2] * spec.voxel_size().z());
}

RayBundle bundle(const Vec3& origin, PointList endpoints) {
  RayBundle r;
  r.origin = origin;
  r.endpoints = std::move(endpoints);
  r.static_count = r.endpoints.size();
  return r;
}

}  // namespace

TEST_SUITE("occupancy") {

TEST_CASE("voxelize examples") {
  const GridSpec spec = GridSpec::default_spec();
  CHECK(voxelize(PointList{}, spec).count(CellState::kOccupied) == 0);
  CHECK(voxelize(PointList{}, spec).count(CellState::kFree) == spec.voxel_count());

  const Index3 idx{100, 120, 7};
  const auto one = voxelize(PointList{spec.voxel_center(idx)}, spec);
  CHECK(one.count(CellState::kOccupied) == 1);
  CHECK(one.at(idx) == CellState::kOccupied);
}

TEST_CASE("voxelize equals brute-force binning") {
  const GridSpec spec(Vec3(-2, -2, -1), Vec3(0.5, 0.5, 0.5), {8, 8, 4});
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-2.5, 2.5);
  for (const int min_points : {1, 2}) {
    PointList pts;
    for (int i = 0; i < 100; ++i) pts.emplace_back(u(rng), u(rng), u(rng) * 0.5);
    std::map<Index3, int> counts;
    for (const auto& p : pts) {
      std::array<int, 3> c{};
      if (oracle::cell_of(p, spec.origin(), 0.5, 8, c) && c[2] < 4) ++counts[{c[0], c[1], c[2]}];
    }
    const auto grid = voxelize(pts, spec, min_points);
    std::size_t expected = 0;
    for (const auto& [idx, n] : counts) {
      if (n >= min_points) {
        ++expected;
        CHECK(grid.at(idx) == CellState::kOccupied);
      }
    }
    CHECK(grid.count(CellState::kOccupied) == expected);
  }
}

TEST_CASE("axis ray visits the voxels before the endpoint") {
  const auto got = traverse_ray(kUnit, Vec3(0.5, 0.5, 0.5), Vec3(3.5, 0.5, 0.5));
  const std::vector<Index3> expected{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  CHECK(got == expected);
  const auto oracle_set = sampled_voxels(kUnit, Vec3(0.5, 0.5, 0.5), Vec3(3.5, 0.5, 0.5));
  CHECK(std::set<Index3>(got.begin(), got.end()) == oracle_set);
}

TEST_CASE("ray inside one voxel visits nothing") {
  CHECK(traverse_ray(kUnit, Vec3(0.2, 0.2, 0.5), Vec3(0.8, 0.7, 0.5)).empty());
}

TEST_CASE("diagonal through corners matches sampling up to corner-touch cells") {
  const Vec3 a(0.5, 0.5, 0.5), b(2.5, 2.5, 0.5);
  const auto got = traverse_ray(kUnit, a, b);
  const auto expected = sampled_voxels(kUnit, a, b, 1000000);
  const std::set<Index3> visited(got.begin(), got.end());
  for (const auto& c : expected) CHECK(visited.count(c) == 1);
  for (const auto& c : visited) {
    if (expected.count(c)) continue;
    const Vec3 lo = cell_lo(kUnit, c);
    CHECK(oracle::chord_length(a, b, lo, lo + Vec3::Ones()) == 0.0);
  }
  // Lower axis first at the corner.
  REQUIRE(got.size() >= 2);
  CHECK(got[1] == Index3{1, 0, 0});
}

TEST_CASE("segments outside the grid visit nothing and long rays are clipped") {
  CHECK(traverse_ray(kUnit, Vec3(-5, -5, 0.5), Vec3(-1, -3, 0.5)).empty());
  const auto clipped = traverse_ray(kUnit, Vec3(-3, 0.5, 0.5), Vec3(9, 0.5, 0.5));
  CHECK(clipped.size() == 4);
}

TEST_CASE("random rays match the sampling oracle") {
  const GridSpec spec(Vec3(-4, -4, -2), Vec3(0.4, 0.4, 0.4), {20, 20, 10});
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-4.5, 4.5), uz(-2.3, 2.3);
  for (int r = 0; r < 200; ++r) {
    const Vec3 a(u(rng), u(rng), uz(rng)), b(u(rng), u(rng), uz(rng));
    const auto got = traverse_ray(spec, a, b);
    const std::set<Index3> visited(got.begin(), got.end());
    CHECK(visited.size() == got.size());
    for (const auto& c : sampled_voxels(spec, a, b)) CHECK(visited.count(c) == 1);
    const auto end = world_to_index(spec, b);
    if (end) CHECK(visited.count(*end) == 0);
  }
}

TEST_CASE("empty evidence is all UNKNOWN") {
  const auto g = build_target_grid({}, {}, {}, kUnit);
  CHECK(g.count(CellState::kUnknown) == kUnit.voxel_count());
}

TEST_CASE("single ray at a wall: free before, occupied at, unknown behind") {
  const GridSpec spec(Vec3::Zero(), Vec3::Ones(), {8, 1, 1});
  const Vec3 origin(0.5, 0.5, 0.5), hit(5.2, 0.5, 0.5);
  const std::vector<RayBundle> rays{bundle(origin, {hit})};
  const auto g = build_target_grid(PointList{hit}, {}, rays, spec);
  for (std::int64_t x = 0; x < 5; ++x) CHECK(g.at(Index3{x, 0, 0}) == CellState::kFree);
  CHECK(g.at(Index3{5, 0, 0}) == CellState::kOccupied);
  CHECK(g.at(Index3{6, 0, 0}) == CellState::kUnknown);
  CHECK(g.at(Index3{7, 0, 0}) == CellState::kUnknown);
}

TEST_CASE("an occupied voxel is not cleared by a ray passing through it") {
  const GridSpec spec(Vec3::Zero(), Vec3::Ones(), {8, 1, 1});
  const std::vector<RayBundle> rays{bundle(Vec3(0.5, 0.5, 0.5), {Vec3(7.5, 0.5, 0.5)})};
  const auto g = build_target_grid(PointList{Vec3(3.5, 0.5, 0.5), Vec3(7.5, 0.5, 0.5)}, {}, rays, spec);
  CHECK(g.at(Index3{3, 0, 0}) == CellState::kOccupied);
  CHECK(g.at(Index3{4, 0, 0}) == CellState::kFree);
}

TEST_CASE("adding rays never reduces evidence") {
  const GridSpec spec(Vec3(-4, -4, -1), Vec3(0.5, 0.5, 0.5), {16, 16, 4});
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-3.9, 3.9), uz(-0.9, 0.9);
  PointList pts;
  for (int i = 0; i < 30; ++i) pts.emplace_back(u(rng), u(rng), uz(rng));
  const std::vector<RayBundle> few{bundle(Vec3::Zero(), PointList(pts.begin(), pts.begin() + 10))};
  const std::vector<RayBundle> more{few[0], bundle(Vec3(1, 1, 0), PointList(pts.begin() + 10, pts.end()))};
  const auto a = build_target_grid(PointList(pts.begin(), pts.begin() + 10), {}, few, spec);
  const auto b = build_target_grid(pts, {}, more, spec);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(evidence_rank(b.at(i)) >= evidence_rank(a.at(i)));
}

TEST_CASE("merge_max is commutative and keeps the strongest state") {
  OccupancyGrid a(kUnit, CellState::kUnknown), b(kUnit, CellState::kFree);
  a.set(Index3{0, 0, 0}, CellState::kOccupied);
  b.set(Index3{1, 0, 0}, CellState::kUnknown);
  OccupancyGrid ab = a, ba = b;
  ab.merge_max(b);
  ba.merge_max(a);
  CHECK(ab == ba);
  CHECK(ab.at(Index3{0, 0, 0}) == CellState::kOccupied);
  CHECK(ab.at(Index3{1, 0, 0}) == CellState::kUnknown);
  CHECK(ab.at(Index3{2, 0, 0}) == CellState::kFree);
}

TEST_CASE("zero-horizon sample: target covers the input") {
  const RawSequence seq = sim::simulate_sequence(ocf::testing::static_room(), 3);
  const auto b = build_sample(seq, 1, 0, 0, GridSpec::default_spec());
  const auto& in = b.sample.inputs[0];
  const auto& tg = b.sample.targets[0];
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (in.at(i) == CellState::kOccupied) CHECK(tg.at(i) == CellState::kOccupied);
  }
  CHECK(tg.count(CellState::kOccupied) >= in.count(CellState::kOccupied));
}

TEST_CASE("static scene gives identical targets") {
  sim::SceneSpec scene = ocf::testing::static_room();
  const RawSequence seq = sim::simulate_sequence(scene, 12);
  const auto b = build_sample(seq, 5, 5, 5, GridSpec::default_spec());
  REQUIRE(b.sample.targets.size() == 6);
  REQUIRE(b.sample.inputs.size() == 6);
  for (int k = 1; k <= 5; ++k) CHECK(b.sample.targets[k] == b.sample.targets[0]);
  CHECK_NOTHROW(validate(b.sample));
}

TEST_CASE("box moving one voxel per frame shifts its footprint") {
  const GridSpec spec = GridSpec::default_spec();
  sim::SceneSpec s;
  s.sequence_id = "shift";
  sim::DynamicBox car;
  // Faces sit on voxel centers so the sampled footprint is exactly grid-aligned.
  car.box = ocf::testing::make_box("car", Vec3(6.0, 0.0, 1.0), Vec3(0.6, 0.6, 0.6));
  car.velocity = Vec3(4.0, 0.0, 0.0);
  s.dynamic_boxes = {car};
  s.sensor = ocf::testing::default_sensor();
  s.sensor.n_azimuth = 1440;
  s.sensor.elevations_rad.clear();
  for (int i = 0; i <= 40; ++i) s.sensor.elevations_rad.push_back(ocf::testing::deg(-20.0 + 0.5 * i));
  s.sensor.ego_to_sensor = RigidTransform::translation_only(0.0, 0.0, 1.0);
  s.ego = ocf::testing::linear_ego(Vec3::Zero(), 0.0, Vec3::Zero());
  const RawSequence seq = sim::simulate_sequence(s, 7);
  const auto b = build_sample(seq, 3, 3, 3, spec);

  auto footprint = [&](const OccupancyGrid& g) {
    std::set<Index3> out;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g.at(i) == CellState::kOccupied) out.insert(spec.unlinear(i));
    }
    return out;
  };
  const auto base = footprint(b.sample.targets[0]);
  REQUIRE(!base.empty());
  for (int k = 1; k <= 3; ++k) {
    std::set<Index3> shifted;
    for (auto idx : base) {
      idx[0] += k;
      shifted.insert(idx);
    }
    CHECK(footprint(b.sample.targets[k]) == shifted);
  }
}

TEST_CASE("insufficient frames is a range error") {
  const RawSequence seq = sim::simulate_sequence(ocf::testing::static_room(), 4);
  CHECK_THROWS_AS(build_sample(seq, 1, 2, 1, GridSpec::default_spec()), RangeError);
  CHECK_THROWS_AS(build_sample(seq, 2, 1, 2, GridSpec::default_spec()), RangeError);
}

TEST_CASE("inputs hold no UNKNOWN and targets are at least as dense") {
  const RawSequence seq = sim::simulate_sequence(ocf::testing::two_moving_boxes_ground(), 6);
  const auto b = build_sample(seq, 2, 2, 3, GridSpec::default_spec());
  for (const auto& g : b.sample.inputs) CHECK(g.count(CellState::kUnknown) == 0);
  CHECK(b.sample.targets[0].count(CellState::kOccupied) >= b.sample.inputs.back().count(CellState::kOccupied));
  CHECK(b.dynamic_instances == 2);
}

TEST_CASE("aggregation window widens with context and clips to the sequence") {
  const RawSequence seq = sim::simulate_sequence(ocf::testing::static_room(), 10);
  CHECK(aggregation_window(seq, 4, 2, 2, 0) == std::vector<std::int64_t>{2, 3, 4, 5, 6});
  CHECK(aggregation_window(seq, 4, 2, 2, 1) == std::vector<std::int64_t>{1, 2, 3, 4, 5, 6, 7});
  CHECK(aggregation_window(seq, 2, 2, 2, 5).front() == 0);
  CHECK(aggregation_window(seq, 7, 2, 2, 5).back() == 9);
}

TEST_CASE("pooled and per-target modes agree on static scenes") {
  const RawSequence seq = sim::simulate_sequence(ocf::testing::static_room(), 5);
  SampleOptions pooled;
  pooled.ray_mode = RayMode::kPooled;
  const auto a = build_sample(seq, 2, 2, 2, GridSpec::default_spec());
  const auto b = build_sample(seq, 2, 2, 2, GridSpec::default_spec(), pooled);
  CHECK(a.sample == b.sample);
}

}  // TEST_SUITE
