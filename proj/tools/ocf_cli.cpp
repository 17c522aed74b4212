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

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ocf/ocf.h"

namespace {

using nlohmann::json;

constexpr int kExitInput = 2;
constexpr int kExitInternal = 3;

int exit_code(ocf_status s) {
  if (s == OCF_OK) return 0;
  return s == OCF_ERR_INTERNAL ? kExitInternal : kExitInput;
}

int report_failure(ocf_status s) {
  std::cerr << "level=error status=\"" << ocf_status_string(s) << "\" message=\"" << ocf_last_error()
            << "\"\n";
  return exit_code(s);
}

/// Takes ownership of a string returned by the library.
std::string take(char* s) {
  std::string out = s ? s : "";
  ocf_string_free(s);
  return out;
}

/// Writes JSON to `path`, or standard output when empty.
int emit(const json& j, const std::string& path) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty()) {
    std::cout << text;
    return 0;
  }
  std::ofstream f(path, std::ios::binary);
  if (!(f << text)) {
    std::cerr << "level=error message=\"cannot write " << path << "\"\n";
    return kExitInput;
  }
  return 0;
}

/// Values from --config fill every option not given on the command line.
/// Keys are option names with '-' replaced by '_'.
class ConfigOverlay {
 public:
  explicit ConfigOverlay(CLI::App* app) : app_(app) {
    app->add_option("--config", path_, "JSON file with option values; flags win");
  }

  /// Loads the file; false on a parse failure.
  bool load() {
    if (path_.empty()) return true;
    std::ifstream f(path_);
    if (!f) {
      std::cerr << "level=error message=\"cannot read config " << path_ << "\"\n";
      return false;
    }
    try {
      file_ = json::parse(f);
    } catch (const json::exception& e) {
      std::cerr << "level=error message=\"config " << path_ << ": " << e.what() << "\"\n";
      return false;
    }
    if (!file_.is_object()) {
      std::cerr << "level=error message=\"config " << path_ << ": expected an object\"\n";
      return false;
    }
    return true;
  }

  const json& file() const { return file_; }

  /// Value of a flag or its config key, if either is set.
  template <typename T>
  std::optional<T> get(const std::string& flag, const T& flag_value) const {
    if (app_->count("--" + flag) > 0) return flag_value;
    std::string key = flag;
    for (auto& c : key) c = c == '-' ? '_' : c;
    if (file_.contains(key)) return file_[key].get<T>();
    return std::nullopt;
  }

 private:
  CLI::App* app_;
  std::string path_;
  json file_ = json::object();
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Occupancy completion and forecasting dataset toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ocf_version()));

  int jobs = 0;
  auto add_jobs = [&](CLI::App* sub) {
    sub->add_option("--jobs,-j", jobs, "Worker threads (default: OCF_JOBS, else 1)");
  };

  // sim
  auto* sim = app.add_subcommand("sim", "Simulate a scene into a raw sequence directory");
  ConfigOverlay sim_cfg(sim);
  std::string scene_path, sim_out;
  std::int64_t frames = 0;
  sim->add_option("--scene", scene_path, "Scene JSON");
  sim->add_option("--frames", frames, "Number of frames");
  sim->add_option("--out", sim_out, "Output root; the sequence goes to <out>/<sequence_id>");

  // curate
  auto* curate = app.add_subcommand("curate", "Build a dataset from raw sequences");
  ConfigOverlay cur_cfg(curate);
  std::string raw_dir, cur_out, name, preset, splits, ray_mode;
  int t_in = 0, t_out = 0, min_points = 1, stride = 1, context = 0;
  std::uint64_t seed = 0;
  double box_margin = 0.0;
  bool no_sync = false;
  curate->add_option("--raw", raw_dir, "Raw sequence directory or root of several");
  curate->add_option("--out", cur_out, "Dataset output directory");
  curate->add_option("--name", name, "Dataset name");
  curate->add_option("--preset", preset, "Temporal setup: 5/5, 5/10 or 10/10");
  curate->add_option("--t-in", t_in, "Input frames before t = 0");
  curate->add_option("--t-out", t_out, "Forecast frames after t = 0");
  curate->add_option("--min-points", min_points, "Points for an occupied target voxel");
  curate->add_option("--stride", stride, "Frames between sample anchors");
  curate->add_option("--context", context, "Extra aggregation frames on each side");
  curate->add_option("--splits", splits, "Split preset: lyft, argoverse or apolloscape");
  curate->add_option("--seed", seed, "Split seed");
  curate->add_option("--ray-mode", ray_mode, "per-target or pooled");
  curate->add_option("--box-margin", box_margin, "Box inflation for point assignment, meters");
  curate->add_flag("--no-sync", no_sync, "Disable dynamic-object synchronization");
  add_jobs(curate);

  // baseline
  auto* baseline = app.add_subcommand("baseline", "Run a reference forecaster over a dataset");
  ConfigOverlay base_cfg(baseline);
  std::string base_dataset, method, split, base_out;
  baseline->add_option("--dataset", base_dataset, "Dataset directory");
  baseline->add_option("--method", method, "static-world, persistence or union");
  baseline->add_option("--split", split, "train, val or test (default: all)");
  baseline->add_option("--out", base_out, "Prediction output directory");
  add_jobs(baseline);

  // eval
  auto* eval = app.add_subcommand("eval", "Score predictions against a dataset");
  ConfigOverlay eval_cfg(eval);
  std::string pred_dir, eval_dataset, eval_out;
  double threshold = 0.5;
  eval->add_option("--pred", pred_dir, "Prediction directory");
  eval->add_option("--dataset", eval_dataset, "Dataset directory");
  eval->add_option("--threshold", threshold, "Binarization threshold");
  eval->add_option("--out", eval_out, "Report path (default: standard output)");
  add_jobs(eval);

  // stats
  auto* stats = app.add_subcommand("stats", "Dataset statistics");
  ConfigOverlay stats_cfg(stats);
  std::string stats_dataset, stats_out;
  stats->add_option("--dataset", stats_dataset, "Dataset directory");
  stats->add_option("--out", stats_out, "Report path (default: standard output)");
  add_jobs(stats);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  auto missing = [](const char* what) {
    std::cerr << "level=error message=\"" << what << " is required\"\n";
    return kExitInput;
  };

  try {
    if (sim->parsed()) {
      if (!sim_cfg.load()) return kExitInput;
      const auto scene = sim_cfg.get("scene", scene_path);
      const auto n = sim_cfg.get("frames", frames);
      const auto out = sim_cfg.get("out", sim_out);
      if (!scene) return missing("--scene");
      if (!n) return missing("--frames");
      if (!out) return missing("--out");
      char* result = nullptr;
      const ocf_status s = ocf_sim(scene->c_str(), *n, out->c_str(), &result);
      if (s != OCF_OK) return report_failure(s);
      return emit(json::parse(take(result)), "");
    }

    if (curate->parsed()) {
      if (!cur_cfg.load()) return kExitInput;
      json config = cur_cfg.file();
      const auto raw = cur_cfg.get("raw", raw_dir);
      const auto out = cur_cfg.get("out", cur_out);
      if (!raw) return missing("--raw");
      if (!out) return missing("--out");
      if (curate->count("--name")) config["name"] = name;
      if (curate->count("--preset")) {
        config["preset"] = preset;
        config.erase("T_in");
        config.erase("T_out");
      }
      if (curate->count("--t-in")) config["T_in"] = t_in;
      if (curate->count("--t-out")) config["T_out"] = t_out;
      if (curate->count("--min-points")) config["min_points"] = min_points;
      if (curate->count("--stride")) config["stride"] = stride;
      if (curate->count("--context")) config["context"] = context;
      if (curate->count("--splits")) config["splits"] = splits;
      if (curate->count("--seed")) config["seed"] = seed;
      if (curate->count("--ray-mode")) config["ray_mode"] = ray_mode;
      if (curate->count("--box-margin")) config["box_margin"] = box_margin;
      if (no_sync) config["synchronize"] = false;
      const int j = cur_cfg.get("jobs", jobs).value_or(0);
      char* result = nullptr;
      const std::string text = config.dump();
      const ocf_status s = ocf_curate(raw->c_str(), out->c_str(), text.c_str(), j, &result);
      if (s != OCF_OK) return report_failure(s);
      const json m = json::parse(take(result));
      return emit({{"dataset", *out}, {"samples", m["samples"].size()}, {"frame_counts", m["frame_counts"]}},
                  "");
    }

    if (baseline->parsed()) {
      if (!base_cfg.load()) return kExitInput;
      const auto dataset = base_cfg.get("dataset", base_dataset);
      const auto m = base_cfg.get("method", method);
      const auto sp = base_cfg.get("split", split);
      const auto out = base_cfg.get("out", base_out);
      if (!dataset) return missing("--dataset");
      if (!m) return missing("--method");
      if (!out) return missing("--out");
      const int j = base_cfg.get("jobs", jobs).value_or(0);
      char* result = nullptr;
      const ocf_status s = ocf_baseline(dataset->c_str(), m->c_str(), sp ? sp->c_str() : nullptr,
                                        out->c_str(), j, &result);
      if (s != OCF_OK) return report_failure(s);
      json r = json::parse(take(result));
      r["samples"] = r["predictions"].size();
      r.erase("predictions");
      return emit(r, "");
    }

    if (eval->parsed()) {
      if (!eval_cfg.load()) return kExitInput;
      const auto pred = eval_cfg.get("pred", pred_dir);
      const auto dataset = eval_cfg.get("dataset", eval_dataset);
      const double t = eval_cfg.get("threshold", threshold).value_or(0.5);
      const std::string out = eval_cfg.get("out", eval_out).value_or("");
      if (!pred) return missing("--pred");
      if (!dataset) return missing("--dataset");
      const int j = eval_cfg.get("jobs", jobs).value_or(0);
      char* result = nullptr;
      const ocf_status s = ocf_eval(pred->c_str(), dataset->c_str(), t, j, &result);
      if (s != OCF_OK) return report_failure(s);
      return emit(json::parse(take(result)), out);
    }

    if (stats->parsed()) {
      if (!stats_cfg.load()) return kExitInput;
      const auto dataset = stats_cfg.get("dataset", stats_dataset);
      const std::string out = stats_cfg.get("out", stats_out).value_or("");
      if (!dataset) return missing("--dataset");
      const int j = stats_cfg.get("jobs", jobs).value_or(0);
      char* result = nullptr;
      const ocf_status s = ocf_stats(dataset->c_str(), j, &result);
      if (s != OCF_OK) return report_failure(s);
      return emit(json::parse(take(result)), out);
    }
  } catch (const json::exception& e) {
    std::cerr << "level=error message=\"config: " << e.what() << "\"\n";
    return kExitInput;
  }
  return kExitInternal;
}
