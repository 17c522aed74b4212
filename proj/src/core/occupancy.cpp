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

#include "core/occupancy.hpp"

#include <set>

#include "core/errors.hpp"

namespace ocf {

namespace {

void collect_indices(const GridSpec& spec, std::span<const Vec3> points,
                     std::vector<std::size_t>& out) {
  for (const auto& p : points) {
    if (const auto idx = world_to_index(spec, p)) out.push_back(spec.linear(*idx));
  }
}

void mark_occupied(OccupancyGrid& grid, std::vector<std::size_t>& indices, int min_points) {
  std::sort(indices.begin(), indices.end());
  for (std::size_t i = 0; i < indices.size();) {
    std::size_t j = i;
    while (j < indices.size() && indices[j] == indices[i]) ++j;
    if (static_cast<std::int64_t>(j - i) >= min_points) grid.set(indices[i], CellState::kOccupied);
    i = j;
  }
}

void check_min_points(int min_points) {
  if (min_points < 1) throw ConfigError("min_points must be at least 1");
}

}  // namespace

OccupancyGrid voxelize(std::span<const Vec3> points, const GridSpec& spec, int min_points) {
  check_min_points(min_points);
  OccupancyGrid grid(spec, CellState::kFree);
  std::vector<std::size_t> indices;
  indices.reserve(points.size());
  collect_indices(spec, points, indices);
  mark_occupied(grid, indices, min_points);
  return grid;
}

std::vector<Index3> traverse_ray(const GridSpec& spec, const Vec3& origin, const Vec3& endpoint) {
  std::vector<Index3> out;
  for_each_ray_voxel(spec, origin, endpoint, [&](const Index3& c) { out.push_back(c); });
  return out;
}

void carve_free(OccupancyGrid& grid, const Vec3& origin, std::span<const Vec3> endpoints) {
  const GridSpec& spec = grid.spec();
  auto states = grid.states();
  for (const auto& e : endpoints) {
    if (e == origin) continue;
    for_each_ray_voxel(spec, origin, e, [&](const Index3& c) {
      CellState& s = states[spec.linear(c)];
      if (s == CellState::kUnknown) s = CellState::kFree;
    });
  }
}

OccupancyGrid build_target_grid(std::span<const Vec3> static_points,
                                const std::map<std::string, PointList>& dynamic_points,
                                std::span<const RayBundle> rays, const GridSpec& spec,
                                int min_points) {
  check_min_points(min_points);
  OccupancyGrid grid(spec, CellState::kUnknown);
  for (const auto& bundle : rays) carve_free(grid, bundle.origin, bundle.endpoints);

  std::vector<std::size_t> indices;
  collect_indices(spec, static_points, indices);
  for (const auto& [id, pts] : dynamic_points) collect_indices(spec, pts, indices);
  mark_occupied(grid, indices, min_points);
  return grid;
}

std::vector<std::int64_t> aggregation_window(const RawSequence& seq, std::int64_t t0, int t_in,
                                             int t_out, int context) {
  const std::int64_t lo = std::max(seq.first_frame(), t0 - t_in - context);
  const std::int64_t hi = std::min(seq.last_frame(), t0 + t_out + context);
  std::vector<std::int64_t> window;
  for (std::int64_t f = lo; f <= hi; ++f) window.push_back(f);
  return window;
}

SampleBuild build_sample(const RawSequence& seq, std::int64_t t0, int t_in, int t_out,
                         const GridSpec& spec, const SampleOptions& options) {
  if (t_in < 0 || t_out < 0 || options.context < 0) {
    throw ConfigError("T_in, T_out and context must be non-negative");
  }
  check_min_points(options.min_points);
  if (!seq.has_frame(t0 - t_in) || !seq.has_frame(t0 + t_out)) {
    throw RangeError("sequence " + seq.sequence_id + " lacks frames " +
                     std::to_string(t0 - t_in) + ".." + std::to_string(t0 + t_out) +
                     " for anchor " + std::to_string(t0));
  }

  SampleBuild out;
  out.sample.sequence_id = seq.sequence_id;
  out.sample.t0_frame = t0;

  const RigidTransform& ego_t0 = seq.sweep(t0).ego_pose;
  for (std::int64_t f = t0 - t_in; f <= t0; ++f) {
    const UnifiedSweep u = unify_frame(seq.sweep(f), ego_t0, seq.ego_to_sensor);
    out.sample.inputs.push_back(voxelize(u.points, spec, 1));
  }

  const auto window = aggregation_window(seq, t0, t_in, t_out, options.context);
  const SegmentedWindow segmented(seq, window, t0, options.aggregation);

  std::set<std::string> instances;
  OccupancyGrid observed(spec, CellState::kUnknown);
  for (const auto& frame : segmented.frames()) {
    carve_free(observed, frame.sensor_origin_unified, frame.static_points);
    for (const auto& [id, pts] : frame.dynamic_points) {
      instances.insert(id);
      if (options.ray_mode == RayMode::kPooled) {
        carve_free(observed, frame.sensor_origin_unified, pts);
      }
    }
  }
  out.dynamic_instances = instances.size();

  for (int k = 0; k <= t_out; ++k) {
    const Aggregate agg = segmented.aggregate(t0 + k);
    OccupancyGrid grid = observed;
    if (options.ray_mode == RayMode::kPerTarget) {
      for (const auto& bundle : agg.rays) {
        carve_free(grid, bundle.origin,
                   std::span<const Vec3>(bundle.endpoints).subspan(bundle.static_count));
      }
    }
    std::vector<std::size_t> indices;
    indices.reserve(agg.point_count());
    collect_indices(spec, agg.static_points, indices);
    for (const auto& [id, pts] : agg.dynamic_points) collect_indices(spec, pts, indices);
    mark_occupied(grid, indices, options.min_points);
    out.sample.targets.push_back(std::move(grid));
    out.dropped.insert(out.dropped.end(), agg.dropped.begin(), agg.dropped.end());
  }
  return out;
}

}  // namespace ocf
