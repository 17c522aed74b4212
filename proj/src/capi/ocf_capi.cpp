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

#include "ocf/ocf.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "core/baselines.hpp"
#include "core/dataset_store.hpp"
#include "core/errors.hpp"
#include "core/lidar_sim.hpp"
#include "core/metrics.hpp"
#include "core/occupancy.hpp"
#include "core/pipeline.hpp"
#include "core/raw_ingest.hpp"

struct ocf_sequence {
  ocf::RawSequence seq;
};

struct ocf_scene {
  ocf::sim::SceneSpec scene;
};

struct ocf_sample {
  ocf::Sample sample;
};

struct ocf_prediction {
  ocf::Prediction pred;
};

namespace {

thread_local std::string g_last_error;

ocf_status fail(ocf_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

ocf_status status_of(ocf::ErrorCode c) {
  return static_cast<ocf_status>(static_cast<int>(c));
}

/// Runs `fn`, mapping every exception to a status and a message.
template <typename Fn>
ocf_status guarded(Fn&& fn) {
  try {
    fn();
    return OCF_OK;
  } catch (const ocf::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(OCF_ERR_FORMAT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(OCF_ERR_INTERNAL, "out of memory");
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(OCF_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(OCF_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(OCF_ERR_INTERNAL, "unknown exception");
  }
}

#define OCF_REQUIRE(cond, what)                                  \
  do {                                                           \
    if (!(cond)) return fail(OCF_ERR_INVALID_ARGUMENT, (what)); \
  } while (0)

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

int jobs_of(int jobs) {
  return ocf::resolve_jobs(jobs >= 1 ? std::optional<int>(jobs) : std::nullopt);
}

ocf::PipelineConfig config_of(const char* config_json) {
  if (config_json == nullptr) return {};
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(config_json);
  } catch (const nlohmann::json::exception& e) {
    throw ocf::ConfigError(std::string("config: ") + e.what());
  }
  return ocf::config_from_json(j);
}

void fill_info(const ocf::GridSpec& spec, int t_in, int t_out, ocf_grid_info* out) {
  for (int a = 0; a < 3; ++a) {
    out->origin[a] = static_cast<float>(spec.origin()[a]);
    out->voxel_size[a] = static_cast<float>(spec.voxel_size()[a]);
    out->dims[a] = static_cast<std::uint32_t>(spec.dims()[a]);
  }
  out->t_in = t_in;
  out->t_out = t_out;
}

ocf::GridSpec flat_spec(std::size_t n) {
  return ocf::GridSpec(ocf::Vec3::Zero(), ocf::Vec3::Ones(), {static_cast<std::int64_t>(n), 1, 1});
}

ocf::OccupancyGrid grid_from_codes(const std::uint8_t* gt, std::size_t n) {
  ocf::OccupancyGrid g(flat_spec(n), ocf::CellState::kFree);
  for (std::size_t i = 0; i < n; ++i) {
    if (gt[i] > 2) throw ocf::DataError("label code outside {0, 1, 2} at index " + std::to_string(i));
    g.set(i, static_cast<ocf::CellState>(gt[i]));
  }
  return g;
}

}  // namespace

extern "C" {

const char* ocf_version(void) { return "0.1.0"; }

const char* ocf_status_string(ocf_status status) {
  switch (status) {
    case OCF_OK: return "ok";
    case OCF_ERR_FORMAT: return "format error";
    case OCF_ERR_CONSISTENCY: return "consistency error";
    case OCF_ERR_DATA: return "data error";
    case OCF_ERR_IO: return "io error";
    case OCF_ERR_RANGE: return "range error";
    case OCF_ERR_CONFIG: return "config error";
    case OCF_ERR_SHAPE: return "shape error";
    case OCF_ERR_CORRUPTION: return "corruption error";
    case OCF_ERR_INTERNAL: return "internal error";
    case OCF_ERR_INVALID_ARGUMENT: return "invalid argument";
  }
  return "unknown status";
}

const char* ocf_last_error(void) { return g_last_error.c_str(); }

void ocf_string_free(char* s) { delete[] s; }

void ocf_set_log_callback(ocf_log_fn fn, void* user) {
  if (fn == nullptr) {
    ocf::set_log_sink({});
    return;
  }
  ocf::set_log_sink([fn, user](ocf::LogLevel level, const std::string& line) {
    fn(level == ocf::LogLevel::kWarn ? 1 : 0, line.c_str(), user);
  });
}

void ocf_log_to_stderr(void) {
  ocf::set_log_sink([](ocf::LogLevel level, const std::string& line) {
    std::fprintf(stderr, "%s %s\n", level == ocf::LogLevel::kWarn ? "level=warn" : "level=info",
                 line.c_str());
  });
}

ocf_status ocf_resolve_jobs(int requested, int* out_jobs) {
  OCF_REQUIRE(out_jobs, "out_jobs is NULL");
  return guarded([&] { *out_jobs = jobs_of(requested); });
}

ocf_status ocf_sim(const char* scene_path, int64_t frames, const char* out_dir, char** out_json) {
  OCF_REQUIRE(scene_path && out_dir, "scene_path and out_dir are required");
  return guarded([&] {
    const auto dir = ocf::cmd_sim(scene_path, frames, out_dir);
    if (out_json) *out_json = dup_string(nlohmann::json{{"sequence_dir", dir.string()}, {"frames", frames}}.dump());
  });
}

ocf_status ocf_curate(const char* raw_dir, const char* out_dir, const char* config_json, int jobs,
                      char** out_manifest_json) {
  OCF_REQUIRE(raw_dir && out_dir, "raw_dir and out_dir are required");
  return guarded([&] {
    const auto m = ocf::cmd_curate(raw_dir, out_dir, config_of(config_json), jobs_of(jobs));
    if (out_manifest_json) *out_manifest_json = dup_string(ocf::to_json(m).dump());
  });
}

ocf_status ocf_baseline(const char* dataset_dir, const char* method, const char* split,
                        const char* out_dir, int jobs, char** out_json) {
  OCF_REQUIRE(dataset_dir && method && out_dir, "dataset_dir, method and out_dir are required");
  return guarded([&] {
    std::optional<ocf::Split> s;
    if (split) s = ocf::split_from_string(split);
    const auto j = ocf::cmd_baseline(dataset_dir, ocf::baseline_from_string(method), out_dir, s, jobs_of(jobs));
    if (out_json) *out_json = dup_string(j.dump());
  });
}

ocf_status ocf_eval(const char* pred_dir, const char* dataset_dir, double threshold, int jobs,
                    char** out_report_json) {
  OCF_REQUIRE(pred_dir && dataset_dir, "pred_dir and dataset_dir are required");
  return guarded([&] {
    const auto j = ocf::cmd_eval(pred_dir, dataset_dir, threshold, jobs_of(jobs));
    if (out_report_json) *out_report_json = dup_string(j.dump());
  });
}

ocf_status ocf_stats(const char* dataset_dir, int jobs, char** out_json) {
  OCF_REQUIRE(dataset_dir, "dataset_dir is required");
  return guarded([&] {
    const auto j = ocf::cmd_stats(dataset_dir, jobs_of(jobs));
    if (out_json) *out_json = dup_string(j.dump());
  });
}

ocf_status ocf_sequence_load(const char* dir, ocf_sequence** out) {
  OCF_REQUIRE(dir && out, "dir and out are required");
  return guarded([&] { *out = new ocf_sequence{ocf::load_sequence(dir)}; });
}

ocf_status ocf_sequence_save(const ocf_sequence* seq, const char* dir) {
  OCF_REQUIRE(seq && dir, "seq and dir are required");
  return guarded([&] { ocf::save_sequence(seq->seq, dir); });
}

void ocf_sequence_free(ocf_sequence* seq) { delete seq; }

ocf_status ocf_sequence_frames(const ocf_sequence* seq, int64_t* first, int64_t* last) {
  OCF_REQUIRE(seq && first && last, "seq, first and last are required");
  OCF_REQUIRE(!seq->seq.sweeps.empty(), "sequence has no sweeps");
  *first = seq->seq.first_frame();
  *last = seq->seq.last_frame();
  return OCF_OK;
}

ocf_status ocf_sequence_points(const ocf_sequence* seq, int64_t frame, double* xyz,
                               size_t capacity, size_t* out_count) {
  OCF_REQUIRE(seq && out_count, "seq and out_count are required");
  return guarded([&] {
    const auto& pts = seq->seq.sweep(frame).points;
    *out_count = pts.size();
    if (xyz == nullptr) return;
    if (capacity < pts.size()) throw ocf::ShapeError("buffer holds " + std::to_string(capacity) + " points, need " + std::to_string(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (int a = 0; a < 3; ++a) xyz[3 * i + a] = pts[i][a];
    }
  });
}

ocf_status ocf_scene_parse(const char* scene_json, ocf_scene** out) {
  OCF_REQUIRE(scene_json && out, "scene_json and out are required");
  return guarded([&] {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(scene_json);
    } catch (const nlohmann::json::exception& e) {
      throw ocf::ConfigError(std::string("scene: ") + e.what());
    }
    *out = new ocf_scene{ocf::sim::scene_from_json(j)};
  });
}

void ocf_scene_free(ocf_scene* scene) { delete scene; }

ocf_status ocf_scene_simulate(const ocf_scene* scene, int64_t frames, ocf_sequence** out) {
  OCF_REQUIRE(scene && out, "scene and out are required");
  return guarded([&] { *out = new ocf_sequence{ocf::sim::simulate_sequence(scene->scene, frames)}; });
}

ocf_status ocf_sample_build(const ocf_sequence* seq, int64_t t0, const char* config_json,
                            ocf_sample** out) {
  OCF_REQUIRE(seq && out, "seq and out are required");
  return guarded([&] {
    const auto c = config_of(config_json);
    *out = new ocf_sample{ocf::build_sample(seq->seq, t0, c.t_in, c.t_out, c.grid, c.sample_options()).sample};
  });
}

ocf_status ocf_sample_read(const char* path, ocf_sample** out) {
  OCF_REQUIRE(path && out, "path and out are required");
  return guarded([&] { *out = new ocf_sample{ocf::read_sample(path)}; });
}

ocf_status ocf_sample_write(const ocf_sample* sample, const char* path) {
  OCF_REQUIRE(sample && path, "sample and path are required");
  return guarded([&] { ocf::write_sample(sample->sample, path); });
}

void ocf_sample_free(ocf_sample* sample) { delete sample; }

ocf_status ocf_sample_info(const ocf_sample* sample, ocf_grid_info* out) {
  OCF_REQUIRE(sample && out, "sample and out are required");
  fill_info(sample->sample.spec(), sample->sample.t_in(), sample->sample.t_out(), out);
  return OCF_OK;
}

ocf_status ocf_sample_grid(const ocf_sample* sample, int which, int index, uint8_t* out,
                           size_t voxel_count) {
  OCF_REQUIRE(sample && out, "sample and out are required");
  OCF_REQUIRE(which == 0 || which == 1, "which must be 0 (inputs) or 1 (targets)");
  const auto& grids = which == 0 ? sample->sample.inputs : sample->sample.targets;
  if (index < 0 || static_cast<std::size_t>(index) >= grids.size()) {
    return fail(OCF_ERR_RANGE, "grid index " + std::to_string(index) + " out of range");
  }
  const auto states = grids[static_cast<std::size_t>(index)].states();
  if (voxel_count != states.size()) {
    return fail(OCF_ERR_SHAPE, "buffer holds " + std::to_string(voxel_count) + " voxels, grid has " +
                                   std::to_string(states.size()));
  }
  for (std::size_t i = 0; i < states.size(); ++i) out[i] = static_cast<std::uint8_t>(states[i]);
  return OCF_OK;
}

ocf_status ocf_prediction_read(const char* path, ocf_prediction** out) {
  OCF_REQUIRE(path && out, "path and out are required");
  return guarded([&] { *out = new ocf_prediction{ocf::read_prediction(path)}; });
}

void ocf_prediction_free(ocf_prediction* pred) { delete pred; }

ocf_status ocf_prediction_info(const ocf_prediction* pred, ocf_grid_info* out) {
  OCF_REQUIRE(pred && out, "pred and out are required");
  OCF_REQUIRE(!pred->pred.frames.empty(), "prediction has no frames");
  fill_info(pred->pred.frames.front().spec(), pred->pred.t_in,
            static_cast<int>(pred->pred.frames.size()) - 1, out);
  return OCF_OK;
}

ocf_status ocf_prediction_frame(const ocf_prediction* pred, int index, float* out,
                                size_t voxel_count) {
  OCF_REQUIRE(pred && out, "pred and out are required");
  const auto& frames = pred->pred.frames;
  if (index < 0 || static_cast<std::size_t>(index) >= frames.size()) {
    return fail(OCF_ERR_RANGE, "frame index " + std::to_string(index) + " out of range");
  }
  const auto p = frames[static_cast<std::size_t>(index)].probs();
  if (voxel_count != p.size()) {
    return fail(OCF_ERR_SHAPE, "buffer holds " + std::to_string(voxel_count) + " voxels, grid has " +
                                   std::to_string(p.size()));
  }
  std::memcpy(out, p.data(), p.size() * sizeof(float));
  return OCF_OK;
}

ocf_status ocf_metrics_frame(const float* probs, const uint8_t* gt, size_t n, double threshold,
                             ocf_frame_metrics* out) {
  OCF_REQUIRE(probs && gt && out && n > 0, "probs, gt and out are required and n must be > 0");
  return guarded([&] {
    const ocf::ProbabilityGrid p(flat_spec(n), std::vector<float>(probs, probs + n));
    const ocf::FrameMetrics m = ocf::frame_metrics(p, grid_from_codes(gt, n), threshold);
    *out = {m.iou, m.ap, m.precision, m.recall, m.f1, m.tp, m.fp, m.fn, m.tn, m.masked};
  });
}

ocf_status ocf_loss_soft_iou(const float* probs, const uint8_t* gt, size_t n,
                             const size_t* sample_sizes, size_t n_samples, double* out) {
  OCF_REQUIRE(out && (n == 0 || (probs && gt)) && (n_samples == 0 || sample_sizes),
              "null buffer");
  return guarded([&] {
    for (std::size_t i = 0; i < n; ++i) {
      if (!(probs[i] >= 0.0f && probs[i] <= 1.0f)) throw ocf::DataError("probability outside [0, 1]");
    }
    *out = ocf::soft_iou_flat({probs, n}, {gt, n}, {sample_sizes, n_samples});
  });
}

ocf_status ocf_loss_bce(const float* probs, const uint8_t* gt, size_t n, double* out) {
  OCF_REQUIRE(out && (n == 0 || (probs && gt)), "null buffer");
  return guarded([&] {
    for (std::size_t i = 0; i < n; ++i) {
      if (!(probs[i] >= 0.0f && probs[i] <= 1.0f)) throw ocf::DataError("probability outside [0, 1]");
    }
    *out = ocf::bce_flat({probs, n}, {gt, n});
  });
}

ocf_status ocf_split_sequences(const char* const* ids, size_t n, double train, double val,
                               double test, uint64_t seed, int* out_splits) {
  OCF_REQUIRE((n == 0 || (ids && out_splits)), "ids and out_splits are required");
  return guarded([&] {
    std::vector<std::string> v;
    for (std::size_t i = 0; i < n; ++i) {
      if (!ids[i]) throw ocf::ConfigError("null sequence id");
      v.emplace_back(ids[i]);
    }
    const auto splits = ocf::split_sequences(v, {train, val, test}, seed);
    for (std::size_t i = 0; i < n; ++i) out_splits[i] = static_cast<int>(splits.at(v[i]));
  });
}

}  // extern "C"
