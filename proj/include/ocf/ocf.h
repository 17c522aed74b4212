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

#ifndef OCF_OCF_H_
#define OCF_OCF_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define OCF_API __declspec(dllexport)
#else
#define OCF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every call returns a status. On failure, ocf_last_error() holds a message
 * for the calling thread until its next failing call. */
typedef enum ocf_status {
  OCF_OK = 0,
  OCF_ERR_FORMAT = 1,
  OCF_ERR_CONSISTENCY = 2,
  OCF_ERR_DATA = 3,
  OCF_ERR_IO = 4,
  OCF_ERR_RANGE = 5,
  OCF_ERR_CONFIG = 6,
  OCF_ERR_SHAPE = 7,
  OCF_ERR_CORRUPTION = 8,
  OCF_ERR_INTERNAL = 9,
  OCF_ERR_INVALID_ARGUMENT = 10
} ocf_status;

/* Voxel states in grid buffers. */
enum { OCF_FREE = 0, OCF_OCCUPIED = 1, OCF_UNKNOWN = 2 };

OCF_API const char* ocf_version(void);
OCF_API const char* ocf_status_string(ocf_status status);
OCF_API const char* ocf_last_error(void);

/* Strings returned through char** out-parameters are owned by the caller. */
OCF_API void ocf_string_free(char* s);

/* Log lines are structured key=value text. level is 0 for info, 1 for warn.
 * A NULL callback silences logging; ocf_log_to_stderr() restores the
 * default. */
typedef void (*ocf_log_fn)(int level, const char* line, void* user);
OCF_API void ocf_set_log_callback(ocf_log_fn fn, void* user);
OCF_API void ocf_log_to_stderr(void);

/* requested >= 1 is returned as is; otherwise OCF_JOBS, else 1. */
OCF_API ocf_status ocf_resolve_jobs(int requested, int* out_jobs);

/* ---- Workflows. config_json is a JSON object text or NULL; jobs <= 0
 * means ocf_resolve_jobs(0). Results come back as JSON text. ---- */

OCF_API ocf_status ocf_sim(const char* scene_path, int64_t frames, const char* out_dir,
                           char** out_json);
OCF_API ocf_status ocf_curate(const char* raw_dir, const char* out_dir, const char* config_json,
                              int jobs, char** out_manifest_json);
/* method: "static-world", "persistence" or "union"; split: "train", "val",
 * "test" or NULL for every sample. */
OCF_API ocf_status ocf_baseline(const char* dataset_dir, const char* method, const char* split,
                                const char* out_dir, int jobs, char** out_json);
OCF_API ocf_status ocf_eval(const char* pred_dir, const char* dataset_dir, double threshold,
                            int jobs, char** out_report_json);
OCF_API ocf_status ocf_stats(const char* dataset_dir, int jobs, char** out_json);

/* ---- Raw sequences and scenes ---- */

typedef struct ocf_sequence ocf_sequence;
typedef struct ocf_scene ocf_scene;

OCF_API ocf_status ocf_sequence_load(const char* dir, ocf_sequence** out);
OCF_API ocf_status ocf_sequence_save(const ocf_sequence* seq, const char* dir);
OCF_API void ocf_sequence_free(ocf_sequence* seq);
OCF_API ocf_status ocf_sequence_frames(const ocf_sequence* seq, int64_t* first, int64_t* last);
/* Number of points of one sweep, and a copy of them as xyz triples when
 * `xyz` is non-NULL and holds 3 * capacity doubles. */
OCF_API ocf_status ocf_sequence_points(const ocf_sequence* seq, int64_t frame, double* xyz,
                                       size_t capacity, size_t* out_count);

OCF_API ocf_status ocf_scene_parse(const char* scene_json, ocf_scene** out);
OCF_API void ocf_scene_free(ocf_scene* scene);
OCF_API ocf_status ocf_scene_simulate(const ocf_scene* scene, int64_t frames, ocf_sequence** out);

/* ---- Samples and predictions ---- */

typedef struct ocf_sample ocf_sample;
typedef struct ocf_prediction ocf_prediction;

typedef struct ocf_grid_info {
  float origin[3];
  float voxel_size[3];
  uint32_t dims[3];
  int t_in;
  int t_out;
} ocf_grid_info;

/* Curates one anchor of a sequence with the given configuration. */
OCF_API ocf_status ocf_sample_build(const ocf_sequence* seq, int64_t t0, const char* config_json,
                                    ocf_sample** out);
OCF_API ocf_status ocf_sample_read(const char* path, ocf_sample** out);
OCF_API ocf_status ocf_sample_write(const ocf_sample* sample, const char* path);
OCF_API void ocf_sample_free(ocf_sample* sample);
OCF_API ocf_status ocf_sample_info(const ocf_sample* sample, ocf_grid_info* out);
/* Copies one grid's states (x fastest). which: 0 inputs, 1 targets;
 * index 0 is t = -T_in for inputs and t = 0 for targets. */
OCF_API ocf_status ocf_sample_grid(const ocf_sample* sample, int which, int index, uint8_t* out,
                                   size_t voxel_count);

OCF_API ocf_status ocf_prediction_read(const char* path, ocf_prediction** out);
OCF_API void ocf_prediction_free(ocf_prediction* pred);
OCF_API ocf_status ocf_prediction_info(const ocf_prediction* pred, ocf_grid_info* out);
OCF_API ocf_status ocf_prediction_frame(const ocf_prediction* pred, int index, float* out,
                                        size_t voxel_count);

/* ---- Metrics on flat arrays. gt holds OCF_* state codes. ---- */

typedef struct ocf_frame_metrics {
  double iou, ap, precision, recall, f1;
  uint64_t tp, fp, fn, tn, masked;
} ocf_frame_metrics;

OCF_API ocf_status ocf_metrics_frame(const float* probs, const uint8_t* gt, size_t n,
                                     double threshold, ocf_frame_metrics* out);
/* sample_sizes partitions the arrays into consecutive samples. */
OCF_API ocf_status ocf_loss_soft_iou(const float* probs, const uint8_t* gt, size_t n,
                                     const size_t* sample_sizes, size_t n_samples, double* out);
OCF_API ocf_status ocf_loss_bce(const float* probs, const uint8_t* gt, size_t n, double* out);

/* out_splits[i] receives 0 train, 1 val, 2 test for ids[i]. */
OCF_API ocf_status ocf_split_sequences(const char* const* ids, size_t n, double train, double val,
                                       double test, uint64_t seed, int* out_splits);

#ifdef __cplusplus
}
#endif

#endif /* OCF_OCF_H_ */
