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

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "core/curation.hpp"
#include "core/geometry.hpp"
#include "core/grids.hpp"
#include "core/raw_ingest.hpp"

namespace ocf {

/// OCCUPIED where a voxel holds at least `min_points` points, FREE elsewhere.
/// Out-of-bounds points are ignored.
OccupancyGrid voxelize(std::span<const Vec3> points, const GridSpec& spec, int min_points = 1);

/// Calls `visit(Index3)` for every voxel whose interior the open segment
/// origin -> endpoint crosses, in traversal order, stopping before the voxel
/// holding the endpoint. The segment is clipped to the grid. When two axes
/// cross a face at the same parameter, the lower axis steps first.
template <typename Visit>
void for_each_ray_voxel(const GridSpec& spec, const Vec3& origin, const Vec3& endpoint,
                        Visit&& visit) {
  const Vec3 d = endpoint - origin;
  const Vec3& lo = spec.origin();
  const Vec3& size = spec.voxel_size();
  const auto& dims = spec.dims();

  double t_enter = 0.0;
  double t_exit = 1.0;
  for (int a = 0; a < 3; ++a) {
    const double hi = lo[a] + static_cast<double>(dims[a]) * size[a];
    if (d[a] == 0.0) {
      if (origin[a] < lo[a] || origin[a] >= hi) return;
      continue;
    }
    double t1 = (lo[a] - origin[a]) / d[a];
    double t2 = (hi - origin[a]) / d[a];
    if (t1 > t2) std::swap(t1, t2);
    t_enter = std::max(t_enter, t1);
    t_exit = std::min(t_exit, t2);
  }
  if (!(t_enter < t_exit)) return;

  Index3 cell{};
  int step[3];
  for (int a = 0; a < 3; ++a) {
    step[a] = d[a] > 0.0 ? 1 : (d[a] < 0.0 ? -1 : 0);
    const double p = origin[a] + t_enter * d[a];
    double f = std::floor((p - lo[a]) / size[a]);
    if (lo[a] + f * size[a] > p) f -= 1.0;
    else if (lo[a] + (f + 1.0) * size[a] <= p) f += 1.0;
    // Entering through a face while moving down the axis: the face belongs
    // to the cell above, but the segment continues into the cell below.
    if (step[a] < 0 && lo[a] + f * size[a] == p) f -= 1.0;
    cell[a] = std::clamp(static_cast<std::int64_t>(f), std::int64_t{0}, dims[a] - 1);
  }

  const auto end_cell = world_to_index(spec, endpoint);
  auto next_crossing = [&](int a) {
    if (step[a] == 0) return std::numeric_limits<double>::infinity();
    const double face = lo[a] + static_cast<double>(cell[a] + (step[a] > 0 ? 1 : 0)) * size[a];
    return (face - origin[a]) / d[a];
  };
  double t_next[3] = {next_crossing(0), next_crossing(1), next_crossing(2)};

  for (;;) {
    if (end_cell && cell == *end_cell) return;
    visit(static_cast<const Index3&>(cell));
    int axis = 0;
    if (t_next[1] < t_next[axis]) axis = 1;
    if (t_next[2] < t_next[axis]) axis = 2;
    if (!(t_next[axis] < t_exit)) return;
    cell[axis] += step[axis];
    if (cell[axis] < 0 || cell[axis] >= dims[axis]) return;
    t_next[axis] = next_crossing(axis);
  }
}

/// Voxels crossed strictly before the endpoint voxel, in traversal order.
std::vector<Index3> traverse_ray(const GridSpec& spec, const Vec3& origin, const Vec3& endpoint);

/// Marks FREE every voxel crossed by a ray that is still UNKNOWN.
void carve_free(OccupancyGrid& grid, const Vec3& origin, std::span<const Vec3> endpoints);

/// Three-state target grid. OCCUPIED from voxelizing all points, FREE where a
/// ray passed and nothing was hit, UNKNOWN elsewhere.
OccupancyGrid build_target_grid(std::span<const Vec3> static_points,
                                const std::map<std::string, PointList>& dynamic_points,
                                std::span<const RayBundle> rays, const GridSpec& spec,
                                int min_points = 1);

enum class RayMode {
  /// Free space per target, with dynamic returns synced to that target.
  kPerTarget,
  /// One free-space carving for all targets, dynamic returns left where
  /// they were captured.
  kPooled,
};

struct SampleOptions {
  int min_points = 1;
  /// Extra frames aggregated on each side of the sample span, clipped to the
  /// sequence.
  int context = 0;
  AggregationOptions aggregation;
  RayMode ray_mode = RayMode::kPerTarget;
};

struct SampleBuild {
  Sample sample;
  std::vector<DroppedObject> dropped;  // per target, concatenated
  std::size_t dynamic_instances = 0;   // distinct instances with points in the window
};

/// Frames aggregated for the ground truth of an anchor.
std::vector<std::int64_t> aggregation_window(const RawSequence& seq, std::int64_t t0, int t_in,
                                             int t_out, int context);

/// Throws RangeError when frames t0 - t_in .. t0 + t_out are not all present.
SampleBuild build_sample(const RawSequence& seq, std::int64_t t0, int t_in, int t_out,
                         const GridSpec& spec, const SampleOptions& options = {});

}  // namespace ocf
