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

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <mutex>

#include "core/errors.hpp"
#include "core/lidar_sim.hpp"
#include "core/pipeline.hpp"
#include "support/scenes.hpp"
#include "support/tempdir.hpp"

using namespace ocf;
namespace fs = std::filesystem;
using ocf::testing::TempDir;

namespace {

/// Collects log lines for the lifetime of the object.
class LogCapture {
 public:
  LogCapture() {
    set_log_sink([this](LogLevel level, const std::string& line) {
      std::lock_guard lock(mu_);
      lines_.push_back((level == LogLevel::kWarn ? "warn " : "info ") + line);
    });
  }
  ~LogCapture() { set_log_sink({}); }
  std::vector<std::string> lines() const {
    std::lock_guard lock(mu_);
    return lines_;
  }

 private:
  mutable std::mutex mu_;
  std::vector<std::string> lines_;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

/// Small grid around the ego keeps the workflow tests fast.
GridSpec small_grid() { return GridSpec(Vec3(-12.8, -12.8, -2.0), Vec3(0.4, 0.4, 0.4), {64, 64, 12}); }

void write_raw(const fs::path& root, sim::SceneSpec scene, const std::string& id, std::int64_t frames) {
  scene.sequence_id = id;
  save_sequence(sim::simulate_sequence(scene, frames), root / id);
}

PipelineConfig small_config(int t_in, int t_out) {
  PipelineConfig c;
  c.grid = small_grid();
  c.t_in = t_in;
  c.t_out = t_out;
  c.splits = {1.0, 0.0, 0.0};
  return c;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("temporal and split presets") {
  CHECK(temporal_preset("5/5") == std::pair{5, 5});
  CHECK(temporal_preset("5/10") == std::pair{5, 10});
  CHECK(temporal_preset("10/10") == std::pair{10, 10});
  CHECK_THROWS_AS(temporal_preset("3/3"), ConfigError);
  const auto lyft = split_preset("lyft");
  CHECK(lyft.train == doctest::Approx(120.0 / 180.0));
  const auto argo = split_preset("argoverse");
  CHECK(argo.test == doctest::Approx(24.0 / 89.0));
  const auto apollo = split_preset("apolloscape");
  CHECK(apollo.val == doctest::Approx(6.0 / 52.0));
  CHECK_THROWS_AS(split_preset("kitti"), ConfigError);
}

TEST_CASE("config overlay and validation") {
  const auto c = config_from_json({{"preset", "5/10"}, {"stride", 2}, {"splits", {{"train", 3}, {"val", 1}}},
                                   {"ray_mode", "pooled"}, {"synchronize", false}});
  CHECK(c.t_in == 5);
  CHECK(c.t_out == 10);
  CHECK(c.stride == 2);
  CHECK(c.splits.train == 0.75);
  CHECK(c.splits.test == 0.0);
  CHECK(c.ray_mode == RayMode::kPooled);
  CHECK_FALSE(c.synchronize);
  CHECK(config_from_json(to_json(c)).t_out == 10);
  CHECK(to_json(config_from_json(to_json(c))) == to_json(c));

  CHECK_THROWS_AS(config_from_json({{"stride", 0}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"T_in", -1}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"min_points", 0}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"ray_mode", "sideways"}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"T_in", "five"}}), ConfigError);
}

TEST_CASE("jobs resolution") {
  ::unsetenv("OCF_JOBS");
  CHECK(resolve_jobs(std::nullopt) == 1);
  CHECK(resolve_jobs(3) == 3);
  CHECK_THROWS_AS(resolve_jobs(0), ConfigError);
  ::setenv("OCF_JOBS", "4", 1);
  CHECK(resolve_jobs(std::nullopt) == 4);
  CHECK(resolve_jobs(2) == 2);
  ::setenv("OCF_JOBS", "many", 1);
  CHECK_THROWS_AS(resolve_jobs(std::nullopt), ConfigError);
  ::unsetenv("OCF_JOBS");
}

TEST_CASE("anchors with a full horizon") {
  RawSequence seq;
  for (std::int64_t f = 0; f < 20; ++f) {
    LidarSweep s;
    s.frame_index = f;
    seq.sweeps.push_back(s);
  }
  const auto a = sample_anchors(seq, 5, 5, 1);
  REQUIRE(a.size() == 10);
  CHECK(a.front() == 5);
  CHECK(a.back() == 14);
  CHECK(sample_anchors(seq, 5, 5, 20).size() <= 1);
  CHECK(sample_anchors(seq, 10, 10, 1).empty());
}

TEST_CASE("curate writes one sample per anchor, deterministically") {
  TempDir raw("raw"), out_a("a"), out_b("b");
  write_raw(raw.path(), ocf::testing::static_room(), "room", 9);
  write_raw(raw.path(), ocf::testing::one_moving_box(), "mover", 9);
  PipelineConfig c = small_config(2, 2);
  c.splits = {0.5, 0.5, 0.0};
  const auto m = cmd_curate(raw.path(), out_a.path(), c, 1);
  CHECK(m.samples.size() == 10);
  CHECK(m.sequence_splits.size() == 2);
  CHECK(m.frame_count(Split::kTrain) + m.frame_count(Split::kVal) == 10);
  cmd_curate(raw.path(), out_b.path(), c, 3);
  for (const auto& rec : m.samples) CHECK(slurp(out_a / rec.path) == slurp(out_b / rec.path));
  CHECK(slurp(out_a / "manifest.json") == slurp(out_b / "manifest.json"));

  const Sample s = read_sample(out_a / m.samples.front().path);
  CHECK(s.t_in() == 2);
  CHECK(s.t_out() == 2);
  CHECK(s.spec() == small_grid());
}

TEST_CASE("curate reports dropped objects and per-split counts") {
  TempDir raw("raw"), out("out");
  RawSequence seq = sim::simulate_sequence(ocf::testing::one_moving_box(), 6);
  seq.tracks[0].entries.erase(5);
  save_sequence(seq, raw.path() / "mover");
  LogCapture log;
  const auto m = cmd_curate(raw.path(), out.path(), small_config(1, 1), 2);
  std::size_t dropped_lines = 0, split_lines = 0;
  for (const auto& l : log.lines()) {
    dropped_lines += l.rfind("warn event=dropped_object", 0) == 0;
    split_lines += l.find("event=split_frames") != std::string::npos;
  }
  CHECK(dropped_lines > 0);
  CHECK(split_lines == 3);
  std::size_t recorded = 0;
  for (const auto& r : m.samples) recorded += r.dropped_objects;
  CHECK(recorded > 0);
}

TEST_CASE("curate rejects an empty raw directory and duplicate sequence ids") {
  TempDir raw("raw"), out("out");
  CHECK_THROWS(cmd_curate(raw.path(), out.path(), small_config(1, 1), 1));
  sim::SceneSpec scene = ocf::testing::static_room();
  scene.sequence_id = "same";
  save_sequence(sim::simulate_sequence(scene, 4), raw / "x");
  save_sequence(sim::simulate_sequence(scene, 4), raw / "y");
  CHECK_THROWS_AS(cmd_curate(raw.path(), out.path(), small_config(1, 1), 1), ConsistencyError);
}

TEST_CASE("static-world on static scenes evaluates to mIoU 1") {
  TempDir raw("raw"), data("data"), pred("pred");
  write_raw(raw.path(), ocf::testing::static_room(), "room", 7);
  cmd_curate(raw.path(), data.path(), small_config(2, 2), 2);
  const auto p = cmd_baseline(data.path(), BaselineMethod::kStaticWorld, pred.path(), std::nullopt, 2);
  CHECK(p["oracle"] == true);
  CHECK(p["predictions"].size() == 3);
  const auto r = cmd_eval(pred.path(), data.path(), 0.5, 2);
  CHECK(r["averaged"]["miou"].get<double>() == 1.0);
  CHECK(r["pooled"]["miou"].get<double>() == 1.0);
  CHECK(r["samples"].get<int>() == 3);
  CHECK(r["iou_by_step"].size() == 3);
  CHECK(r["label"].get<std::string>().find("oracle") != std::string::npos);
}

TEST_CASE("eval refuses mismatched sample sets") {
  TempDir raw("raw"), data("data"), pred("pred");
  write_raw(raw.path(), ocf::testing::static_room(), "room", 7);
  cmd_curate(raw.path(), data.path(), small_config(2, 2), 1);
  auto p = cmd_baseline(data.path(), BaselineMethod::kPersistence, pred.path(), std::nullopt, 1);
  p["predictions"].erase(p["predictions"].size() - 1);
  std::ofstream(pred / "predictions.json") << p.dump();
  CHECK_THROWS_AS(cmd_eval(pred.path(), data.path(), 0.5, 1), ConsistencyError);
}

TEST_CASE("stats report densities and counts") {
  TempDir raw("raw"), data("data");
  write_raw(raw.path(), ocf::testing::two_moving_boxes_ground(), "traffic", 6);
  cmd_curate(raw.path(), data.path(), small_config(1, 1), 1);
  const auto s = cmd_stats(data.path(), 2);
  const auto& total = s["total"];
  CHECK(total["frames"] == 4);
  CHECK(total["scenes"] == 1);
  CHECK(total["mean_occupied_target"].get<double>() >= total["mean_occupied_input"].get<double>());
  CHECK(total["target_to_input_ratio"].get<double>() >= 1.0);
  CHECK(total["unknown_fraction"].get<double>() > 0.0);
  CHECK(total["unknown_fraction"].get<double>() < 1.0);
  CHECK(s["splits"]["train"]["frames"] == 4);
  CHECK(s["splits"]["val"]["frames"] == 0);
}

TEST_CASE("sim writes a loadable sequence") {
  TempDir dir("sim");
  const auto scene_path = dir / "scene.json";
  std::ofstream(scene_path) << sim::to_json(ocf::testing::rotating_box()).dump();
  const auto out = cmd_sim(scene_path, 3, dir / "raw");
  CHECK(out == dir / "raw" / "spinner");
  const RawSequence seq = load_sequence(out);
  CHECK(seq.sweeps.size() == 3);
  CHECK(seq.tracks.size() == 1);
  CHECK_THROWS_AS(cmd_sim(dir / "missing.json", 3, dir / "raw"), IoError);
}

}  // TEST_SUITE
