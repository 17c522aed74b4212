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

#include "core/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "core/errors.hpp"

namespace ocf {

namespace {

void check_specs(const GridSpec& a, const GridSpec& b) {
  if (a != b) throw ShapeError("prediction and ground truth grids differ in spec");
}

struct Counts {
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0, masked = 0;
};

template <typename IsPositive>
Counts confusion(const OccupancyGrid& gt, IsPositive&& predicted) {
  Counts c;
  const auto g = gt.states();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i] == CellState::kUnknown) {
      ++c.masked;
      continue;
    }
    const bool truth = g[i] == CellState::kOccupied;
    const bool pred = predicted(i);
    if (pred && truth) ++c.tp;
    else if (pred) ++c.fp;
    else if (truth) ++c.fn;
    else ++c.tn;
  }
  return c;
}

double ratio_or_one(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 1.0 : static_cast<double>(num) / static_cast<double>(den);
}

double f1_of(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

MetricMeans means_from_counts(const Counts& c, double ap) {
  MetricMeans m;
  m.iou = ratio_or_one(c.tp, c.tp + c.fp + c.fn);
  m.precision = ratio_or_one(c.tp, c.tp + c.fp);
  m.recall = ratio_or_one(c.tp, c.tp + c.fn);
  m.f1 = f1_of(m.precision, m.recall);
  m.ap = ap;
  return m;
}

}  // namespace

OccupancyGrid binarize(const ProbabilityGrid& pred, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("threshold outside [0, 1]");
  OccupancyGrid out(pred.spec(), CellState::kFree);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (static_cast<double>(pred.at(i)) >= threshold) out.set(i, CellState::kOccupied);
  }
  return out;
}

double frame_iou(const OccupancyGrid& pred_binary, const OccupancyGrid& gt) {
  check_specs(pred_binary.spec(), gt.spec());
  const Counts c = confusion(gt, [&](std::size_t i) { return pred_binary.at(i) == CellState::kOccupied; });
  return ratio_or_one(c.tp, c.tp + c.fp + c.fn);
}

PrecisionRecall frame_pr(const OccupancyGrid& pred_binary, const OccupancyGrid& gt) {
  check_specs(pred_binary.spec(), gt.spec());
  const Counts c = confusion(gt, [&](std::size_t i) { return pred_binary.at(i) == CellState::kOccupied; });
  const double p = ratio_or_one(c.tp, c.tp + c.fp);
  const double r = ratio_or_one(c.tp, c.tp + c.fn);
  return {p, r, f1_of(p, r)};
}

double frame_ap(const ProbabilityGrid& pred, const OccupancyGrid& gt) {
  check_specs(pred.spec(), gt.spec());
  std::vector<std::pair<float, bool>> scored;
  scored.reserve(gt.size());
  std::uint64_t positives = 0;
  const auto g = gt.states();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i] == CellState::kUnknown) continue;
    const bool truth = g[i] == CellState::kOccupied;
    positives += truth ? 1 : 0;
    scored.emplace_back(pred.at(i), truth);
  }
  if (positives == 0) return 1.0;
  std::sort(scored.begin(), scored.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  double ap = 0.0;
  double prev_recall = 0.0;
  std::uint64_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < scored.size();) {
    std::size_t j = i;
    for (; j < scored.size() && scored[j].first == scored[i].first; ++j) {
      if (scored[j].second) ++tp;
      else ++fp;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(positives);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return ap;
}

FrameMetrics frame_metrics(const ProbabilityGrid& pred, const OccupancyGrid& gt, double threshold) {
  check_specs(pred.spec(), gt.spec());
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("threshold outside [0, 1]");
  const Counts c = confusion(gt, [&](std::size_t i) { return static_cast<double>(pred.at(i)) >= threshold; });
  const MetricMeans m = means_from_counts(c, frame_ap(pred, gt));
  FrameMetrics out;
  out.iou = m.iou;
  out.ap = m.ap;
  out.precision = m.precision;
  out.recall = m.recall;
  out.f1 = m.f1;
  out.tp = c.tp;
  out.fp = c.fp;
  out.fn = c.fn;
  out.tn = c.tn;
  out.masked = c.masked;
  return out;
}

void ReportBuilder::add(std::size_t step, const FrameMetrics& m) {
  frames_.push_back(m);
  steps_.push_back(step);
}

SequenceReport ReportBuilder::finish() const {
  if (frames_.empty()) throw ShapeError("no frames to report");
  SequenceReport r;
  r.frames = frames_;
  Counts total;
  double ap_sum = 0.0;
  std::vector<double> step_sum;
  std::vector<std::size_t> step_n;
  for (std::size_t k = 0; k < frames_.size(); ++k) {
    const auto& f = frames_[k];
    r.averaged.iou += f.iou;
    r.averaged.ap += f.ap;
    r.averaged.precision += f.precision;
    r.averaged.recall += f.recall;
    r.averaged.f1 += f.f1;
    ap_sum += f.ap;
    total.tp += f.tp;
    total.fp += f.fp;
    total.fn += f.fn;
    total.tn += f.tn;
    total.masked += f.masked;
    if (steps_[k] >= step_sum.size()) {
      step_sum.resize(steps_[k] + 1, 0.0);
      step_n.resize(steps_[k] + 1, 0);
    }
    step_sum[steps_[k]] += f.iou;
    ++step_n[steps_[k]];
  }
  const auto n = static_cast<double>(frames_.size());
  r.averaged.iou /= n;
  r.averaged.ap /= n;
  r.averaged.precision /= n;
  r.averaged.recall /= n;
  r.averaged.f1 /= n;
  r.pooled = means_from_counts(total, ap_sum / n);
  for (std::size_t s = 0; s < step_sum.size(); ++s) {
    r.iou_by_step.push_back(step_n[s] ? step_sum[s] / static_cast<double>(step_n[s]) : 0.0);
  }
  return r;
}

SequenceReport sequence_report(std::span<const ProbabilityGrid> preds,
                               std::span<const OccupancyGrid> gts, double threshold) {
  if (preds.size() != gts.size()) {
    throw ShapeError(std::to_string(preds.size()) + " predicted frames for " +
                     std::to_string(gts.size()) + " ground-truth frames");
  }
  if (preds.empty()) throw ShapeError("empty frame list");
  ReportBuilder b;
  for (std::size_t k = 0; k < preds.size(); ++k) b.add(k, frame_metrics(preds[k], gts[k], threshold));
  return b.finish();
}

namespace {

template <typename T>
double soft_iou_impl(std::span<const T> probs, std::span<const std::uint8_t> gt,
                     std::span<const std::size_t> sample_sizes) {
  if (probs.size() != gt.size()) throw ShapeError("probability and label arrays differ in length");
  if (sample_sizes.empty()) throw ConfigError("empty batch");
  std::size_t total = 0;
  for (const auto n : sample_sizes) total += n;
  if (total != probs.size()) throw ShapeError("sample sizes do not cover the arrays");

  double sum = 0.0;
  std::size_t pos = 0;
  for (const auto n : sample_sizes) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = pos; i < pos + n; ++i) {
      if (gt[i] > 2) throw DataError("label code outside {0, 1, 2}");
      if (gt[i] == static_cast<std::uint8_t>(CellState::kUnknown)) continue;
      const double y = gt[i] == static_cast<std::uint8_t>(CellState::kOccupied) ? 1.0 : 0.0;
      const double p = static_cast<double>(probs[i]);
      num += y * p;
      den += y + p - y * p;
    }
    if (den > 0.0) sum += num / den;
    pos += n;
  }
  return -sum / static_cast<double>(sample_sizes.size());
}

template <typename T>
double bce_impl(std::span<const T> probs, std::span<const std::uint8_t> gt) {
  if (probs.size() != gt.size()) throw ShapeError("probability and label arrays differ in length");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (gt[i] > 2) throw DataError("label code outside {0, 1, 2}");
    if (gt[i] == static_cast<std::uint8_t>(CellState::kUnknown)) continue;
    const double y = gt[i] == static_cast<std::uint8_t>(CellState::kOccupied) ? 1.0 : 0.0;
    const double p = std::clamp(static_cast<double>(probs[i]), kBceEpsilon, 1.0 - kBceEpsilon);
    sum += -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
    ++n;
  }
  if (n == 0) throw ConfigError("no unmasked voxels in batch");
  return sum / static_cast<double>(n);
}

}  // namespace

double soft_iou_flat(std::span<const float> probs, std::span<const std::uint8_t> gt,
                     std::span<const std::size_t> sample_sizes) {
  return soft_iou_impl(probs, gt, sample_sizes);
}

double soft_iou_flat(std::span<const double> probs, std::span<const std::uint8_t> gt,
                     std::span<const std::size_t> sample_sizes) {
  return soft_iou_impl(probs, gt, sample_sizes);
}

double bce_flat(std::span<const float> probs, std::span<const std::uint8_t> gt) {
  return bce_impl(probs, gt);
}

double bce_flat(std::span<const double> probs, std::span<const std::uint8_t> gt) {
  return bce_impl(probs, gt);
}

namespace {

struct Flattened {
  std::vector<float> probs;
  std::vector<std::uint8_t> gt;
  std::vector<std::size_t> sizes;
};

Flattened flatten(std::span<const LossSample> batch) {
  if (batch.empty()) throw ConfigError("empty batch");
  Flattened f;
  for (const auto& s : batch) {
    if (s.preds.size() != s.gts.size() || s.preds.empty()) {
      throw ShapeError("loss sample frame counts do not match");
    }
    std::size_t n = 0;
    for (std::size_t k = 0; k < s.preds.size(); ++k) {
      check_specs(s.preds[k].spec(), s.gts[k].spec());
      const auto p = s.preds[k].probs();
      f.probs.insert(f.probs.end(), p.begin(), p.end());
      for (const CellState c : s.gts[k].states()) f.gt.push_back(static_cast<std::uint8_t>(c));
      n += p.size();
    }
    f.sizes.push_back(n);
  }
  return f;
}

}  // namespace

double soft_iou_loss(std::span<const LossSample> batch) {
  const Flattened f = flatten(batch);
  return soft_iou_flat(f.probs, f.gt, f.sizes);
}

double soft_iou_frame(const ProbabilityGrid& pred, const OccupancyGrid& gt) {
  const LossSample s{std::span<const ProbabilityGrid>(&pred, 1), std::span<const OccupancyGrid>(&gt, 1)};
  return soft_iou_loss(std::span<const LossSample>(&s, 1));
}

double bce_loss(std::span<const LossSample> batch) {
  const Flattened f = flatten(batch);
  return bce_flat(f.probs, f.gt);
}

}  // namespace ocf
