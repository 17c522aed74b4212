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

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "core/geometry.hpp"
#include "core/grids.hpp"
#include "core/io_util.hpp"

namespace ocf {

// OCF1 sample file, little-endian:
//   "OCF1" | u16 version=1 | 3 x f32 origin | 3 x f32 voxel_size | 3 x u32 dims
//   | u16 T_in | u16 T_out | (T_in + 1) input grids | (T_out + 1) target grids
// Each grid: u32 run count, then runs of (u32 length, u8 state). Cells are
// ordered x fastest, then y, then z.
//
// Prediction files share the header with version=2 and carry T_out + 1 grids
// of raw f32 probabilities, one per voxel, in the same cell order.
inline constexpr std::uint16_t kSampleVersion = 1;
inline constexpr std::uint16_t kPredictionVersion = 2;

struct Run {
  std::uint32_t length;
  CellState state;
  bool operator==(const Run&) const = default;
};

std::vector<Run> run_length_encode(const OccupancyGrid& grid);

io::Bytes encode_sample(const Sample& sample);
/// Rejects bad magic or version (FormatError), and truncation, trailing
/// bytes, bad run totals, invalid state codes or UNKNOWN in an input grid
/// (CorruptionError).
Sample decode_sample(const io::Bytes& bytes);

void write_sample(const Sample& sample, const std::filesystem::path& path);
Sample read_sample(const std::filesystem::path& path);

/// T_out + 1 forecast frames for one sample.
struct Prediction {
  int t_in = 0;
  std::vector<ProbabilityGrid> frames;
};

io::Bytes encode_prediction(const Prediction& pred);
Prediction decode_prediction(const io::Bytes& bytes);
void write_prediction(const Prediction& pred, const std::filesystem::path& path);
Prediction read_prediction(const std::filesystem::path& path);

enum class Split { kTrain, kVal, kTest };
inline constexpr std::array<Split, 3> kAllSplits{Split::kTrain, Split::kVal, Split::kTest};
const char* to_string(Split s);
Split split_from_string(const std::string& s);

struct SplitRatios {
  double train = 0.0;
  double val = 0.0;
  double test = 0.0;
};

/// Scene-level partition: sequence id -> split. Deterministic for a seed on
/// every platform; counts come from largest-remainder rounding of the
/// ratios, so each split is within one scene of its exact share.
std::map<std::string, Split> split_sequences(std::vector<std::string> sequence_ids,
                                             const SplitRatios& ratios, std::uint64_t seed);

struct SampleRecord {
  std::string path;  // relative to the dataset root
  std::string sequence_id;
  std::int64_t t0_frame = 0;
  Split split = Split::kTrain;
  std::size_t dynamic_instances = 0;
  std::size_t dropped_objects = 0;
};

struct DatasetManifest {
  std::string name;
  GridSpec spec = GridSpec::default_spec();
  int t_in = 0;
  int t_out = 0;
  std::map<std::string, Split> sequence_splits;
  std::vector<SampleRecord> samples;  // sorted by (sequence_id, t0)

  std::vector<std::string> split_paths(Split s) const;
  std::size_t frame_count(Split s) const;
};

nlohmann::json to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const nlohmann::json& j);

void write_manifest(const DatasetManifest& m, const std::filesystem::path& dataset_dir);
/// Verifies split disjointness and that every listed sample file exists.
DatasetManifest read_manifest(const std::filesystem::path& dataset_dir);

}  // namespace ocf
