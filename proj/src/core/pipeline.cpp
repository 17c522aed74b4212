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

#include "core/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>

#include "core/errors.hpp"
#include "core/lidar_sim.hpp"
#include "core/metrics.hpp"
#include "core/raw_ingest.hpp"

namespace ocf {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::mutex g_log_mutex;
LogSink g_log_sink = [](LogLevel level, const std::string& line) {
  std::cerr << (level == LogLevel::kWarn ? "level=warn " : "level=info ") << line << '\n';
};

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. The exception of the
/// lowest failing index is rethrown once every worker has stopped.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(std::clamp<std::int64_t>(jobs, 1, static_cast<std::int64_t>(std::max<std::size_t>(n, 1))));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::vector<std::exception_ptr> errors(n);
  auto work = [&] {
    for (std::size_t i; !failed.load() && (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
        failed.store(true);
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string anchor_name(std::int64_t t0) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06lld", static_cast<long long>(t0));
  return buf;
}

RayMode ray_mode_from_string(const std::string& s) {
  if (s == "per-target") return RayMode::kPerTarget;
  if (s == "pooled") return RayMode::kPooled;
  throw ConfigError("unknown ray_mode '" + s + "' (expected per-target or pooled)");
}

json metric_means_json(const MetricMeans& m) {
  return {{"miou", m.iou}, {"map", m.ap}, {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
}

}  // namespace

void set_log_sink(LogSink sink) {
  std::lock_guard lock(g_log_mutex);
  g_log_sink = std::move(sink);
}

void log_line(LogLevel level, const std::string& line) {
  std::lock_guard lock(g_log_mutex);
  if (g_log_sink) g_log_sink(level, line);
}

void PipelineConfig::validate() const {
  if (t_in < 0 || t_out < 0) throw ConfigError("T_in and T_out must be >= 0");
  if (stride < 1) throw ConfigError("stride must be >= 1");
  if (context < 0) throw ConfigError("context must be >= 0");
  if (min_points < 1) throw ConfigError("min_points must be >= 1");
  if (!(box_margin >= 0.0)) throw ConfigError("box_margin must be >= 0");
}

SampleOptions PipelineConfig::sample_options() const {
  SampleOptions o;
  o.min_points = min_points;
  o.context = context;
  o.aggregation.synchronize = synchronize;
  o.aggregation.box_margin = box_margin;
  o.ray_mode = ray_mode;
  return o;
}

std::pair<int, int> temporal_preset(const std::string& name) {
  if (name == "5/5") return {5, 5};
  if (name == "5/10") return {5, 10};
  if (name == "10/10") return {10, 10};
  throw ConfigError("unknown temporal preset '" + name + "' (expected 5/5, 5/10 or 10/10)");
}

SplitRatios split_preset(const std::string& name) {
  auto from_counts = [](double a, double b, double c) {
    const double n = a + b + c;
    return SplitRatios{a / n, b / n, c / n};
  };
  if (name == "lyft") return from_counts(120, 30, 30);
  if (name == "argoverse") return from_counts(50, 15, 24);
  if (name == "apolloscape") return from_counts(40, 6, 6);
  throw ConfigError("unknown split preset '" + name + "'");
}

PipelineConfig config_from_json(const json& j, PipelineConfig c) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  try {
    if (j.contains("name")) c.name = j["name"].get<std::string>();
    if (j.contains("grid")) c.grid = io::grid_from_json(j["grid"]);
    if (j.contains("preset")) std::tie(c.t_in, c.t_out) = temporal_preset(j["preset"].get<std::string>());
    if (j.contains("T_in")) c.t_in = j["T_in"].get<int>();
    if (j.contains("T_out")) c.t_out = j["T_out"].get<int>();
    if (j.contains("min_points")) c.min_points = j["min_points"].get<int>();
    if (j.contains("stride")) c.stride = j["stride"].get<int>();
    if (j.contains("context")) c.context = j["context"].get<int>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("ray_mode")) c.ray_mode = ray_mode_from_string(j["ray_mode"].get<std::string>());
    if (j.contains("box_margin")) c.box_margin = j["box_margin"].get<double>();
    if (j.contains("synchronize")) c.synchronize = j["synchronize"].get<bool>();
    if (j.contains("splits")) {
      const json& s = j["splits"];
      if (s.is_string()) {
        c.splits = split_preset(s.get<std::string>());
      } else {
        const double a = s.value("train", 0.0), b = s.value("val", 0.0), t = s.value("test", 0.0);
        if (!(a >= 0.0 && b >= 0.0 && t >= 0.0) || !(a + b + t > 0.0)) {
          throw ConfigError("split weights must be non-negative with a positive sum");
        }
        c.splits = {a / (a + b + t), b / (a + b + t), t / (a + b + t)};
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

json to_json(const PipelineConfig& c) {
  return {{"name", c.name},
          {"grid", io::to_json(c.grid)},
          {"T_in", c.t_in},
          {"T_out", c.t_out},
          {"min_points", c.min_points},
          {"stride", c.stride},
          {"context", c.context},
          {"splits", {{"train", c.splits.train}, {"val", c.splits.val}, {"test", c.splits.test}}},
          {"seed", c.seed},
          {"ray_mode", c.ray_mode == RayMode::kPerTarget ? "per-target" : "pooled"},
          {"box_margin", c.box_margin},
          {"synchronize", c.synchronize}};
}

int resolve_jobs(std::optional<int> requested) {
  if (requested) {
    if (*requested < 1) throw ConfigError("--jobs must be >= 1");
    return *requested;
  }
  if (const char* env = std::getenv("OCF_JOBS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw ConfigError(std::string("OCF_JOBS must be a positive integer, got '") + env + "'");
    return static_cast<int>(v);
  }
  return 1;
}

std::vector<std::int64_t> sample_anchors(const RawSequence& seq, int t_in, int t_out, int stride) {
  std::vector<std::int64_t> anchors;
  if (seq.sweeps.empty()) return anchors;
  for (std::int64_t t0 = seq.first_frame() + t_in; t0 + t_out <= seq.last_frame(); t0 += stride) {
    anchors.push_back(t0);
  }
  return anchors;
}

DatasetManifest cmd_curate(const fs::path& raw_dir, const fs::path& out_dir,
                           const PipelineConfig& config, int jobs) {
  config.validate();
  const auto dirs = list_sequence_dirs(raw_dir);
  if (dirs.empty()) throw FormatError(raw_dir.string() + ": no sequences found");

  std::vector<RawSequence> seqs(dirs.size());
  parallel_for(dirs.size(), jobs, [&](std::size_t i) {
    try {
      seqs[i] = load_sequence(dirs[i]);
    } catch (const Error& e) {
      rethrow_with_context(e, dirs[i].string());
    }
  });
  std::sort(seqs.begin(), seqs.end(),
            [](const RawSequence& a, const RawSequence& b) { return a.sequence_id < b.sequence_id; });
  std::vector<std::string> ids;
  for (const auto& s : seqs) {
    if (!ids.empty() && ids.back() == s.sequence_id) {
      throw ConsistencyError("duplicate sequence id '" + s.sequence_id + "'");
    }
    ids.push_back(s.sequence_id);
  }

  DatasetManifest manifest;
  manifest.name = config.name;
  manifest.spec = config.grid;
  manifest.t_in = config.t_in;
  manifest.t_out = config.t_out;
  manifest.sequence_splits = split_sequences(ids, config.splits, config.seed);

  struct Work {
    const RawSequence* seq;
    std::int64_t t0;
  };
  std::vector<Work> work;
  for (const auto& s : seqs) {
    for (const auto t0 : sample_anchors(s, config.t_in, config.t_out, config.stride)) work.push_back({&s, t0});
  }
  manifest.samples.resize(work.size());
  std::vector<std::vector<DroppedObject>> dropped(work.size());
  const SampleOptions options = config.sample_options();

  parallel_for(work.size(), jobs, [&](std::size_t i) {
    const Work& w = work[i];
    SampleRecord& rec = manifest.samples[i];
    rec.sequence_id = w.seq->sequence_id;
    rec.t0_frame = w.t0;
    rec.split = manifest.sequence_splits.at(rec.sequence_id);
    rec.path = "samples/" + rec.sequence_id + "/" + anchor_name(w.t0) + ".ocf";
    try {
      SampleBuild b = build_sample(*w.seq, w.t0, config.t_in, config.t_out, config.grid, options);
      write_sample(b.sample, out_dir / rec.path);
      rec.dynamic_instances = b.dynamic_instances;
      rec.dropped_objects = b.dropped.size();
      dropped[i] = std::move(b.dropped);
    } catch (const Error& e) {
      rethrow_with_context(e, "sequence " + rec.sequence_id + " anchor " + std::to_string(w.t0));
    }
  });

  for (std::size_t i = 0; i < work.size(); ++i) {
    for (const auto& d : dropped[i]) {
      log_line(LogLevel::kWarn, "event=dropped_object sequence=" + manifest.samples[i].sequence_id +
                                    " t0=" + std::to_string(manifest.samples[i].t0_frame) +
                                    " instance=" + d.instance_id +
                                    " source_frame=" + std::to_string(d.source_frame) +
                                    " points=" + std::to_string(d.point_count));
    }
  }
  write_manifest(manifest, out_dir);
  for (const Split s : kAllSplits) {
    log_line(LogLevel::kInfo, std::string("event=split_frames split=") + to_string(s) +
                                  " frames=" + std::to_string(manifest.frame_count(s)));
  }
  return manifest;
}

json cmd_baseline(const fs::path& dataset_dir, BaselineMethod method, const fs::path& out_dir,
                  std::optional<Split> split, int jobs) {
  const DatasetManifest m = read_manifest(dataset_dir);
  std::vector<std::string> paths;
  for (const auto& rec : m.samples) {
    if (!split || rec.split == *split) paths.push_back(rec.path);
  }
  parallel_for(paths.size(), jobs, [&](std::size_t i) {
    try {
      const Sample s = read_sample(dataset_dir / paths[i]);
      Prediction p;
      p.t_in = s.t_in();
      p.frames = run_baseline(method, s);
      write_prediction(p, out_dir / paths[i]);
    } catch (const Error& e) {
      rethrow_with_context(e, paths[i]);
    }
  });
  json index = {{"method", to_string(method)},
                {"oracle", is_oracle(method)},
                {"split", split ? json(to_string(*split)) : json("all")},
                {"T_out", m.t_out},
                {"predictions", paths}};
  io::write_json(out_dir / "predictions.json", index);
  log_line(LogLevel::kInfo, std::string("event=baseline method=") + to_string(method) +
                                " samples=" + std::to_string(paths.size()));
  return index;
}

json cmd_eval(const fs::path& pred_dir, const fs::path& dataset_dir, double threshold, int jobs) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("threshold outside [0, 1]");
  const DatasetManifest m = read_manifest(dataset_dir);
  const json index = io::read_json(pred_dir / "predictions.json");
  std::vector<std::string> preds;
  std::string split_name;
  std::string method;
  bool oracle = false;
  try {
    preds = index.at("predictions").get<std::vector<std::string>>();
    split_name = index.value("split", std::string("all"));
    method = index.value("method", std::string("unknown"));
    oracle = index.value("oracle", false);
  } catch (const json::exception& e) {
    throw FormatError("predictions.json: " + std::string(e.what()));
  }

  std::vector<const SampleRecord*> expected;
  for (const auto& rec : m.samples) {
    if (split_name == "all" || to_string(rec.split) == split_name) expected.push_back(&rec);
  }
  {
    std::set<std::string> a(preds.begin(), preds.end());
    std::set<std::string> b;
    for (const auto* r : expected) b.insert(r->path);
    if (a.size() != preds.size()) throw ConsistencyError("predictions.json lists a sample twice");
    if (a != b) {
      std::string detail;
      for (const auto& p : a) {
        if (!b.count(p)) { detail = "prediction " + p + " has no sample in the dataset"; break; }
      }
      for (const auto& p : b) {
        if (detail.empty() && !a.count(p)) { detail = "sample " + p + " has no prediction"; break; }
      }
      throw ConsistencyError("sample-id mismatch for split " + split_name + ": " + detail);
    }
  }
  if (expected.empty()) throw ConsistencyError("no samples to evaluate");

  struct PerSample {
    std::vector<FrameMetrics> frames;
    double soft_iou = 0.0;
    double bce_sum = 0.0;
    std::uint64_t bce_count = 0;
  };
  std::vector<PerSample> results(expected.size());
  parallel_for(expected.size(), jobs, [&](std::size_t i) {
    const std::string& path = expected[i]->path;
    try {
      const Sample s = read_sample(dataset_dir / path);
      const Prediction p = read_prediction(pred_dir / path);
      if (p.frames.size() != s.targets.size()) {
        throw ShapeError(std::to_string(p.frames.size()) + " predicted frames for " +
                         std::to_string(s.targets.size()) + " targets");
      }
      PerSample& r = results[i];
      for (std::size_t k = 0; k < s.targets.size(); ++k) {
        r.frames.push_back(frame_metrics(p.frames[k], s.targets[k], threshold));
      }
      const LossSample ls{p.frames, s.targets};
      const std::span<const LossSample> batch(&ls, 1);
      r.soft_iou = soft_iou_loss(batch);
      for (const auto& f : r.frames) r.bce_count += f.tp + f.fp + f.fn + f.tn;
      if (r.bce_count > 0) r.bce_sum = bce_loss(batch) * static_cast<double>(r.bce_count);
    } catch (const Error& e) {
      rethrow_with_context(e, path);
    }
  });

  ReportBuilder builder;
  json frames = json::array();
  double soft_sum = 0.0, bce_sum = 0.0;
  std::uint64_t bce_count = 0;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const auto& r = results[i];
    for (std::size_t k = 0; k < r.frames.size(); ++k) {
      const FrameMetrics& f = r.frames[k];
      builder.add(k, f);
      frames.push_back({{"sample", expected[i]->path},
                        {"sequence_id", expected[i]->sequence_id},
                        {"t0", expected[i]->t0_frame},
                        {"step", k},
                        {"iou", f.iou},
                        {"ap", f.ap},
                        {"precision", f.precision},
                        {"recall", f.recall},
                        {"f1", f.f1},
                        {"tp", f.tp},
                        {"fp", f.fp},
                        {"fn", f.fn},
                        {"tn", f.tn},
                        {"masked", f.masked}});
    }
    soft_sum += r.soft_iou;
    bce_sum += r.bce_sum;
    bce_count += r.bce_count;
  }
  const SequenceReport rep = builder.finish();
  json out = {{"method", method},
              {"oracle", oracle},
              {"label", oracle ? method + " (oracle)" : method},
              {"split", split_name},
              {"threshold", threshold},
              {"samples", expected.size()},
              {"averaged", metric_means_json(rep.averaged)},
              {"pooled", metric_means_json(rep.pooled)},
              {"iou_by_step", rep.iou_by_step},
              {"soft_iou_loss", soft_sum / static_cast<double>(expected.size())},
              {"bce_loss", bce_count ? json(bce_sum / static_cast<double>(bce_count)) : json(nullptr)},
              {"frames", std::move(frames)}};
  return out;
}

fs::path cmd_sim(const fs::path& scene_json, std::int64_t frames, const fs::path& out_dir) {
  const sim::SceneSpec scene = sim::scene_from_json(io::read_json(scene_json));
  if (scene.ego.explicit_poses() && frames > static_cast<std::int64_t>(scene.ego.poses.size())) {
    throw ConfigError("scene trajectory has " + std::to_string(scene.ego.poses.size()) +
                      " poses, " + std::to_string(frames) + " frames requested");
  }
  const fs::path dir = out_dir / scene.sequence_id;
  save_sequence(sim::simulate_sequence(scene, frames), dir);
  log_line(LogLevel::kInfo, "event=simulated sequence=" + scene.sequence_id +
                                " frames=" + std::to_string(frames));
  return dir;
}

json cmd_stats(const fs::path& dataset_dir, int jobs) {
  const DatasetManifest m = read_manifest(dataset_dir);
  struct PerSample {
    double input_occupied = 0.0;   // mean over input frames
    double target_occupied = 0.0;  // mean over target frames
    std::uint64_t unknown = 0;
    std::uint64_t target_voxels = 0;
  };
  std::vector<PerSample> results(m.samples.size());
  parallel_for(m.samples.size(), jobs, [&](std::size_t i) {
    try {
      const Sample s = read_sample(dataset_dir / m.samples[i].path);
      PerSample& r = results[i];
      for (const auto& g : s.inputs) r.input_occupied += static_cast<double>(g.count(CellState::kOccupied));
      for (const auto& g : s.targets) {
        r.target_occupied += static_cast<double>(g.count(CellState::kOccupied));
        r.unknown += g.count(CellState::kUnknown);
        r.target_voxels += g.size();
      }
      r.input_occupied /= static_cast<double>(s.inputs.size());
      r.target_occupied /= static_cast<double>(s.targets.size());
    } catch (const Error& e) {
      rethrow_with_context(e, m.samples[i].path);
    }
  });

  auto summarize = [&](std::optional<Split> split) {
    double in = 0.0, tg = 0.0;
    std::uint64_t unknown = 0, voxels = 0, n = 0, dyn = 0, dropped = 0;
    std::set<std::string> scenes;
    for (std::size_t i = 0; i < m.samples.size(); ++i) {
      const auto& rec = m.samples[i];
      if (split && rec.split != *split) continue;
      ++n;
      in += results[i].input_occupied;
      tg += results[i].target_occupied;
      unknown += results[i].unknown;
      voxels += results[i].target_voxels;
      dyn += rec.dynamic_instances;
      dropped += rec.dropped_objects;
      scenes.insert(rec.sequence_id);
    }
    const double mean_in = n ? in / static_cast<double>(n) : 0.0;
    const double mean_tg = n ? tg / static_cast<double>(n) : 0.0;
    return json{{"scenes", scenes.size()},
                {"frames", n},
                {"mean_occupied_input", mean_in},
                {"mean_occupied_target", mean_tg},
                {"target_to_input_ratio", mean_in > 0.0 ? json(mean_tg / mean_in) : json(nullptr)},
                {"unknown_fraction", voxels ? json(static_cast<double>(unknown) / static_cast<double>(voxels)) : json(nullptr)},
                {"dynamic_instances", dyn},
                {"mean_dynamic_instances", n ? static_cast<double>(dyn) / static_cast<double>(n) : 0.0},
                {"dropped_objects", dropped}};
  };
  json splits = json::object();
  for (const Split s : kAllSplits) splits[to_string(s)] = summarize(s);
  return {{"name", m.name}, {"T_in", m.t_in}, {"T_out", m.t_out}, {"splits", splits}, {"total", summarize(std::nullopt)}};
}

}  // namespace ocf
