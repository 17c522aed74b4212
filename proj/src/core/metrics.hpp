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
#include <span>
#include <vector>

#include "core/grids.hpp"

namespace ocf {

// Every metric skips voxels whose ground truth is UNKNOWN.

struct FrameMetrics {
  double iou = 1.0;
  double ap = 1.0;
  double precision = 1.0;
  double recall = 1.0;
  double f1 = 1.0;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;
  std::uint64_t masked = 0;
};

struct PrecisionRecall {
  double precision;
  double recall;
  double f1;
};

/// OCCUPIED iff prob >= threshold.
OccupancyGrid binarize(const ProbabilityGrid& pred, double threshold);

/// |pred & gt| / |pred | gt| over occupied voxels; 1 when both are empty.
double frame_iou(const OccupancyGrid& pred_binary, const OccupancyGrid& gt);

/// Precision is 1 with no predicted positives, recall 1 with no true
/// positives in gt, f1 is 0 when both are 0.
PrecisionRecall frame_pr(const OccupancyGrid& pred_binary, const OccupancyGrid& gt);

/// Step-integrated area under the precision-recall curve, one point per
/// distinct score: sum over thresholds of (R_k - R_{k-1}) * P_k.
/// 1 when gt has no occupied voxel.
double frame_ap(const ProbabilityGrid& pred, const OccupancyGrid& gt);

/// All of the above plus the confusion counts, in one pass per quantity.
FrameMetrics frame_metrics(const ProbabilityGrid& pred, const OccupancyGrid& gt, double threshold);

struct MetricMeans {
  double iou = 0.0;
  double ap = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct SequenceReport {
  std::vector<FrameMetrics> frames;
  /// Unweighted mean over all frame records.
  MetricMeans averaged;
  /// Ratios of summed confusion counts; ap is left at the frame mean.
  MetricMeans pooled;
  /// Mean IoU per forecast step (index = step).
  std::vector<double> iou_by_step;
};

/// One sample's frames. Throws ShapeError on length mismatch or empty input.
SequenceReport sequence_report(std::span<const ProbabilityGrid> preds,
                               std::span<const OccupancyGrid> gts, double threshold);

/// Accumulates frame records across samples, keeping per-step curves.
class ReportBuilder {
 public:
  void add(std::size_t step, const FrameMetrics& m);
  SequenceReport finish() const;

 private:
  std::vector<FrameMetrics> frames_;
  std::vector<std::size_t> steps_;
};

/// One sample for the losses: the predicted frames and their ground truth.
struct LossSample {
  std::span<const ProbabilityGrid> preds;
  std::span<const OccupancyGrid> gts;
};

/// -(1/|C|) sum_C [sum_V y * p / sum_V (y + p - y * p)], V being the unmasked
/// voxels of all frames of a sample. A sample whose denominator is 0
/// contributes 0. Throws ConfigError on an empty batch.
double soft_iou_loss(std::span<const LossSample> batch);

/// Same ratio for a single frame.
double soft_iou_frame(const ProbabilityGrid& pred, const OccupancyGrid& gt);

inline constexpr double kBceEpsilon = 1e-7;

/// Mean binary cross-entropy over every unmasked voxel of the batch, with
/// probabilities clamped to [eps, 1 - eps].
double bce_loss(std::span<const LossSample> batch);

// Flat-array forms shared by the structured overloads and the C API.
// gt codes use the CellState values; probs are in [0, 1].
double soft_iou_flat(std::span<const float> probs, std::span<const std::uint8_t> gt,
                     std::span<const std::size_t> sample_sizes);
double bce_flat(std::span<const float> probs, std::span<const std::uint8_t> gt);
double soft_iou_flat(std::span<const double> probs, std::span<const std::uint8_t> gt,
                     std::span<const std::size_t> sample_sizes);
double bce_flat(std::span<const double> probs, std::span<const std::uint8_t> gt);

}  // namespace ocf
