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

#include "core/baselines.hpp"
#include "core/errors.hpp"
#include "core/lidar_sim.hpp"
#include "core/metrics.hpp"
#include "core/occupancy.hpp"
#include "support/scenes.hpp"

using namespace ocf;

namespace {

double mean_iou(const std::vector<ProbabilityGrid>& preds, const std::vector<OccupancyGrid>& gts) {
  return sequence_report(preds, gts, 0.5).averaged.iou;
}

Sample static_sample(int t_in, int t_out) {
  const RawSequence seq = sim::simulate_sequence(ocf::testing::static_room(), t_in + t_out + 1);
  return build_sample(seq, t_in, t_in, t_out, GridSpec::default_spec()).sample;
}

}  // namespace

TEST_SUITE("baselines") {

TEST_CASE("static-world maps states to 1, 0 and 0.5") {
  const GridSpec spec(Vec3::Zero(), Vec3::Ones(), {3, 1, 1});
  OccupancyGrid g(spec, CellState::kFree);
  g.set(std::size_t{0}, CellState::kOccupied);
  g.set(std::size_t{2}, CellState::kUnknown);
  const auto f = static_world_forecast(g, 2);
  REQUIRE(f.size() == 3);
  for (const auto& p : f) {
    CHECK(p.at(0) == 1.0f);
    CHECK(p.at(1) == 0.0f);
    CHECK(p.at(2) == 0.5f);
  }
  CHECK(static_world_forecast(g, 0).size() == 1);
  CHECK_THROWS_AS(static_world_forecast(g, -1), ConfigError);
}

TEST_CASE("static-world scores 1 on a static scene") {
  const Sample s = static_sample(2, 4);
  const auto preds = run_baseline(BaselineMethod::kStaticWorld, s);
  const auto r = sequence_report(preds, s.targets, 0.5);
  for (const double iou : r.iou_by_step) CHECK(iou == 1.0);
  CHECK(mean_iou(static_world_forecast(s.targets[0], 0), {s.targets[0]}) == 1.0);
}

TEST_CASE("static-world IoU on a displaced box equals the overlap count") {
  // Box v = 6 voxels long in x, moving d = 2 voxels per frame.
  const GridSpec spec(Vec3::Zero(), Vec3::Ones(), {40, 3, 3});
  const int v = 6, d = 2, t_out = 4;
  std::vector<OccupancyGrid> targets;
  for (int k = 0; k <= t_out; ++k) {
    OccupancyGrid g(spec, CellState::kFree);
    for (int x = 0; x < v; ++x) g.set(Index3{5 + k * d + x, 1, 1}, CellState::kOccupied);
    targets.push_back(g);
  }
  const auto preds = static_world_forecast(targets[0], t_out);
  const auto r = sequence_report(preds, targets, 0.5);
  for (int k = 0; k <= t_out; ++k) {
    const int overlap = std::max(0, v - k * d);
    const double expected = static_cast<double>(overlap) / static_cast<double>(2 * v - overlap);
    CHECK(std::abs(r.iou_by_step[static_cast<std::size_t>(k)] - expected) <= 1e-12);
  }
}

TEST_CASE("persistence repeats the last input") {
  const Sample s = static_sample(3, 2);
  const auto f = input_persistence_forecast(s);
  REQUIRE(f.size() == 3);
  const auto& last = s.inputs.back();
  for (std::size_t i = 0; i < last.size(); ++i) {
    CHECK(f[2].at(i) == (last.at(i) == CellState::kOccupied ? 1.0f : 0.0f));
  }
}

TEST_CASE("persistence IoU on a static scene is the sparse-to-dense coverage") {
  const Sample s = static_sample(0, 1);
  const auto f = input_persistence_forecast(s);
  const double in = static_cast<double>(s.inputs[0].count(CellState::kOccupied));
  std::size_t target_occ = 0;
  for (std::size_t i = 0; i < s.targets[0].size(); ++i) target_occ += s.targets[0].at(i) == CellState::kOccupied;
  CHECK(frame_iou(binarize(f[0], 0.5), s.targets[0]) == doctest::Approx(in / static_cast<double>(target_occ)).epsilon(1e-12));
}

TEST_CASE("union with one input equals persistence") {
  const Sample s = static_sample(0, 2);
  const auto a = input_union_forecast(s);
  const auto b = input_persistence_forecast(s);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == b[k]);
}

TEST_CASE("union of disjoint inputs") {
  const GridSpec spec(Vec3::Zero(), Vec3::Ones(), {4, 1, 1});
  Sample s;
  OccupancyGrid a(spec, CellState::kFree), b(spec, CellState::kFree);
  a.set(std::size_t{0}, CellState::kOccupied);
  b.set(std::size_t{3}, CellState::kOccupied);
  s.inputs = {a, b};
  s.targets = {OccupancyGrid(spec, CellState::kUnknown)};
  const auto f = input_union_forecast(s);
  CHECK(f[0].at(0) == 1.0f);
  CHECK(f[0].at(1) == 0.0f);
  CHECK(f[0].at(3) == 1.0f);
}

TEST_CASE("union beats persistence on a static scene") {
  const Sample s = static_sample(10, 1);
  const double u = mean_iou(input_union_forecast(s), s.targets);
  const double p = mean_iou(input_persistence_forecast(s), s.targets);
  CHECK(u > p);
}

TEST_CASE("baselines are deterministic and named") {
  const Sample s = static_sample(2, 2);
  for (const auto m : {BaselineMethod::kStaticWorld, BaselineMethod::kPersistence, BaselineMethod::kUnion}) {
    const auto a = run_baseline(m, s);
    const auto b = run_baseline(m, s);
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == b[k]);
    CHECK(baseline_from_string(to_string(m)) == m);
  }
  CHECK(is_oracle(BaselineMethod::kStaticWorld));
  CHECK_FALSE(is_oracle(BaselineMethod::kUnion));
  CHECK_THROWS_AS(baseline_from_string("convlstm"), ConfigError);
}

}  // TEST_SUITE
