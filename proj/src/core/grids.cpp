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

#include "core/grids.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"

namespace ocf {

OccupancyGrid::OccupancyGrid(const GridSpec& spec, CellState fill)
    : spec_(spec), states_(spec.voxel_count(), fill) {}

std::size_t OccupancyGrid::count(CellState s) const {
  return static_cast<std::size_t>(std::count(states_.begin(), states_.end(), s));
}

void OccupancyGrid::merge_max(const OccupancyGrid& other) {
  if (other.spec_ != spec_) throw ShapeError("merge of grids with different specs");
  for (std::size_t i = 0; i < states_.size(); ++i) {
    if (evidence_rank(other.states_[i]) > evidence_rank(states_[i])) states_[i] = other.states_[i];
  }
}

ProbabilityGrid::ProbabilityGrid(const GridSpec& spec, float fill)
    : spec_(spec), probs_(spec.voxel_count(), fill) {
  if (!(fill >= 0.0f && fill <= 1.0f)) throw DataError("probability outside [0, 1]");
}

ProbabilityGrid::ProbabilityGrid(const GridSpec& spec, std::vector<float> probs)
    : spec_(spec), probs_(std::move(probs)) {
  if (probs_.size() != spec_.voxel_count()) {
    throw ShapeError("probability grid has " + std::to_string(probs_.size()) +
                     " values for " + std::to_string(spec_.voxel_count()) + " voxels");
  }
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    if (!(probs_[i] >= 0.0f && probs_[i] <= 1.0f)) {
      throw DataError("probability outside [0, 1] at voxel " + std::to_string(i));
    }
  }
}

void ProbabilityGrid::set(std::size_t i, float p) {
  if (!(p >= 0.0f && p <= 1.0f)) throw DataError("probability outside [0, 1]");
  probs_[i] = p;
}

void validate(const Sample& sample) {
  if (sample.inputs.empty() || sample.targets.empty()) {
    throw ConsistencyError("sample needs at least one input and one target grid");
  }
  const GridSpec& spec = sample.targets.front().spec();
  for (const auto& g : sample.inputs) {
    if (g.spec() != spec) throw ConsistencyError("sample grids do not share one GridSpec");
    if (g.has_unknown()) throw ConsistencyError("input grid holds UNKNOWN cells");
  }
  for (const auto& g : sample.targets) {
    if (g.spec() != spec) throw ConsistencyError("sample grids do not share one GridSpec");
  }
}

}  // namespace ocf
