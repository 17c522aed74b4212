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
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include <json.hpp>

#include "core/baselines.hpp"
#include "core/dataset_store.hpp"
#include "core/occupancy.hpp"

namespace ocf {

enum class LogLevel { kInfo, kWarn };

/// Receives one structured `key=value` line per event.
using LogSink = std::function<void(LogLevel, const std::string&)>;

/// Replaces the process-wide sink; an empty function silences logging.
/// The default writes to standard error.
void set_log_sink(LogSink sink);
void log_line(LogLevel level, const std::string& line);

struct PipelineConfig {
  std::string name = "ocf";
  GridSpec grid = GridSpec::default_spec();
  int t_in = 5;
  int t_out = 5;
  int min_points = 1;
  int stride = 1;
  int context = 0;
  SplitRatios splits{2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0};
  std::uint64_t seed = 0;
  RayMode ray_mode = RayMode::kPerTarget;
  double box_margin = 0.0;
  bool synchronize = true;

  /// Throws ConfigError when T_in, T_out, context < 0, stride < 1 or
  /// min_points < 1.
  void validate() const;
  SampleOptions sample_options() const;
};

/// (T_in, T_out) for the named temporal setups "5/5", "5/10" and "10/10".
std::pair<int, int> temporal_preset(const std::string& name);

/// Scene split ratios of the named corpora: "lyft" (120/30/30),
/// "argoverse" (50/15/24) and "apolloscape" (40/6/6).
SplitRatios split_preset(const std::string& name);

/// Overlays the keys present in `j` onto `base`. Recognized keys: name, grid,
/// preset, T_in, T_out, min_points, stride, context, splits (preset name or
/// {train, val, test} weights), seed, ray_mode, box_margin, synchronize.
PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig base = {});
nlohmann::json to_json(const PipelineConfig& c);

/// --jobs value, else OCF_JOBS, else 1.
int resolve_jobs(std::optional<int> requested);

/// Anchors t0 with t0 - T_in and t0 + T_out inside the sequence, every
/// `stride` frames from the first.
std::vector<std::int64_t> sample_anchors(const RawSequence& seq, int t_in, int t_out, int stride);

/// Curates every sequence under `raw_dir` into `out_dir`:
/// samples/<sequence>/<t0>.ocf plus manifest.json.
DatasetManifest cmd_curate(const std::filesystem::path& raw_dir,
                           const std::filesystem::path& out_dir, const PipelineConfig& config,
                           int jobs = 1);

/// Runs a baseline over one split (all splits when absent); writes one
/// prediction per sample under the sample's relative path, plus
/// predictions.json.
nlohmann::json cmd_baseline(const std::filesystem::path& dataset_dir, BaselineMethod method,
                            const std::filesystem::path& out_dir,
                            std::optional<Split> split = std::nullopt, int jobs = 1);

/// Scores a prediction directory against its dataset. The predicted sample
/// set must equal the dataset's sample set for the split.
nlohmann::json cmd_eval(const std::filesystem::path& pred_dir,
                        const std::filesystem::path& dataset_dir, double threshold = 0.5,
                        int jobs = 1);

/// Simulates a scene file and stores the sequence as <out_dir>/<sequence_id>.
std::filesystem::path cmd_sim(const std::filesystem::path& scene_json, std::int64_t frames,
                              const std::filesystem::path& out_dir);

/// Per-split frame counts, occupancy densities and dynamic-instance counts.
nlohmann::json cmd_stats(const std::filesystem::path& dataset_dir, int jobs = 1);

}  // namespace ocf
