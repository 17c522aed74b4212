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

#include "core/curation.hpp"

#include <algorithm>
#include <limits>

#include "core/errors.hpp"

namespace ocf {

UnifiedSweep unify_frame(const LidarSweep& sweep, const RigidTransform& ego_pose_t0,
                         const RigidTransform& ego_to_sensor) {
  const RigidTransform chain =
      compose(ego_pose_t0.inverse(), compose(sweep.ego_pose, ego_to_sensor));
  const Eigen::Matrix3d r = chain.rotation_matrix();
  const Vec3& t = chain.translation();

  UnifiedSweep out;
  out.frame_index = sweep.frame_index;
  out.points.reserve(sweep.points.size());
  for (const auto& p : sweep.points) out.points.push_back(r * p + t);
  out.sensor_origin = t;
  return out;
}

std::size_t SegmentedSweep::point_count() const {
  std::size_t n = static_points.size();
  for (const auto& [id, pts] : dynamic_points) n += pts.size();
  return n;
}

SegmentedSweep segment_sweep(const UnifiedSweep& sweep, std::span<const OrientedBox> boxes,
                             double box_margin) {
  struct Candidate {
    const OrientedBox* box;
    RigidTransform box_from_frame;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(boxes.size());
  for (const auto& b : boxes) candidates.push_back({&b, b.pose.inverse()});
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return a.box->instance_id < b.box->instance_id;
  });

  SegmentedSweep out;
  out.frame_index = sweep.frame_index;
  out.sensor_origin_unified = sweep.sensor_origin;
  for (const auto& p : sweep.points) {
    const Candidate* best = nullptr;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (const auto& c : candidates) {
      const Vec3 local = c.box_from_frame.apply(p);
      if ((local.cwiseAbs().array() > c.box->half_extents.array() + box_margin + kContainmentTolerance).any()) continue;
      const double d2 = (p - c.box->pose.translation()).squaredNorm();
      if (d2 < best_d2) {  // strict: equal distance keeps the smaller id
        best_d2 = d2;
        best = &c;
      }
    }
    if (best == nullptr) out.static_points.push_back(p);
    else out.dynamic_points[best->box->instance_id].push_back(p);
  }
  return out;
}

PointList sync_object(std::span<const Vec3> points, const RigidTransform& box_pose_src,
                      const RigidTransform& box_pose_dst) {
  const RigidTransform m = compose(box_pose_dst, box_pose_src.inverse());
  const Eigen::Matrix3d r = m.rotation_matrix();
  PointList out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(r * p + m.translation());
  return out;
}

std::size_t Aggregate::point_count() const {
  std::size_t n = static_points.size();
  for (const auto& [id, pts] : dynamic_points) n += pts.size();
  return n;
}

std::vector<OrientedBox> boxes_in_t0_frame(const RawSequence& seq, std::int64_t frame,
                                           std::int64_t t0) {
  const RigidTransform t0_from_world = seq.sweep(t0).ego_pose.inverse();
  std::vector<OrientedBox> out;
  for (const auto& track : seq.tracks) {
    const auto it = track.entries.find(frame);
    if (it != track.entries.end()) out.push_back(transform_box(t0_from_world, it->second));
  }
  std::sort(out.begin(), out.end(),
            [](const OrientedBox& a, const OrientedBox& b) { return a.instance_id < b.instance_id; });
  return out;
}

SegmentedWindow::SegmentedWindow(const RawSequence& seq, std::span<const std::int64_t> window,
                                 std::int64_t t0, const AggregationOptions& options)
    : seq_(&seq), t0_(t0), options_(options), t0_from_world_(seq.sweep(t0).ego_pose.inverse()) {
  const RigidTransform& ego_t0 = seq.sweep(t0).ego_pose;
  frames_.reserve(window.size());
  for (const std::int64_t f : window) {
    const LidarSweep& sweep = seq.sweep(f);
    const UnifiedSweep unified = unify_frame(sweep, ego_t0, seq.ego_to_sensor);
    const auto boxes = boxes_in_t0_frame(seq, f, t0);
    frames_.push_back(segment_sweep(unified, boxes, options_.box_margin));
  }
}

Aggregate SegmentedWindow::aggregate(std::int64_t target) const {
  if (!seq_->has_frame(target)) {
    throw RangeError("target frame " + std::to_string(target) + " is not in sequence " +
                     seq_->sequence_id);
  }
  std::map<std::string, const InstanceBoxTrack*> tracks;
  for (const auto& t : seq_->tracks) tracks[t.instance_id] = &t;

  Aggregate out;
  out.target_frame = target;
  for (const auto& frame : frames_) {
    RayBundle bundle;
    bundle.frame_index = frame.frame_index;
    bundle.origin = frame.sensor_origin_unified;
    bundle.endpoints = frame.static_points;
    bundle.static_count = frame.static_points.size();
    out.static_points.insert(out.static_points.end(), frame.static_points.begin(),
                             frame.static_points.end());
    out.sensor_origins.push_back(frame.sensor_origin_unified);

    for (const auto& [id, pts] : frame.dynamic_points) {
      PointList placed;
      if (!options_.synchronize) {
        placed = pts;
      } else {
        const InstanceBoxTrack& track = *tracks.at(id);
        const auto dst = track.entries.find(target);
        if (dst == track.entries.end()) {
          out.dropped.push_back({id, frame.frame_index, pts.size()});
          continue;
        }
        const auto src = track.entries.find(frame.frame_index);
        placed = sync_object(pts, compose(t0_from_world_, src->second.pose),
                             compose(t0_from_world_, dst->second.pose));
      }
      bundle.endpoints.insert(bundle.endpoints.end(), placed.begin(), placed.end());
      auto& bucket = out.dynamic_points[id];
      bucket.insert(bucket.end(), placed.begin(), placed.end());
    }
    out.rays.push_back(std::move(bundle));
  }
  return out;
}

Aggregate aggregate_to_target(const RawSequence& seq, std::span<const std::int64_t> window,
                              std::int64_t target, std::int64_t t0,
                              const AggregationOptions& options) {
  for (const std::int64_t f : window) {
    if (!seq.has_frame(f)) {
      throw RangeError("window frame " + std::to_string(f) + " is not in sequence " +
                       seq.sequence_id);
    }
  }
  return SegmentedWindow(seq, window, t0, options).aggregate(target);
}

}  // namespace ocf
