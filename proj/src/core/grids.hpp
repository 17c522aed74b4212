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
#include <string>
#include <vector>

#include "core/geometry.hpp"

namespace ocf {

enum class CellState : std::uint8_t { kFree = 0, kOccupied = 1, kUnknown = 2 };

/// Evidence order used when merging observations: UNKNOWN < FREE < OCCUPIED.
constexpr int evidence_rank(CellState s) {
  return s == CellState::kUnknown ? 0 : (s == CellState::kFree ? 1 : 2);
}

/// Dense three-state voxel grid over a GridSpec.
class OccupancyGrid {
 public:
  OccupancyGrid(const GridSpec& spec, CellState fill);

  const GridSpec& spec() const { return spec_; }
  std::size_t size() const { return states_.size(); }

  CellState at(std::size_t i) const { return states_[i]; }
  CellState at(const Index3& idx) const { return states_[spec_.linear(idx)]; }
  void set(std::size_t i, CellState s) { states_[i] = s; }
  void set(const Index3& idx, CellState s) { states_[spec_.linear(idx)] = s; }

  std::span<const CellState> states() const { return states_; }
  std::span<CellState> states() { return states_; }

  std::size_t count(CellState s) const;
  bool has_unknown() const { return count(CellState::kUnknown) > 0; }

  /// Commutative merge: each cell keeps the higher-evidence state.
  void merge_max(const OccupancyGrid& other);

  bool operator==(const OccupancyGrid& other) const = default;

 private:
  GridSpec spec_;
  std::vector<CellState> states_;
};

/// Per-voxel occupancy probabilities in [0, 1].
class ProbabilityGrid {
 public:
  ProbabilityGrid(const GridSpec& spec, float fill);
  ProbabilityGrid(const GridSpec& spec, std::vector<float> probs);

  const GridSpec& spec() const { return spec_; }
  std::size_t size() const { return probs_.size(); }
  float at(std::size_t i) const { return probs_[i]; }
  void set(std::size_t i, float p);
  std::span<const float> probs() const { return probs_; }

  bool operator==(const ProbabilityGrid& other) const = default;

 private:
  GridSpec spec_;
  std::vector<float> probs_;
};

/// One example: binary single-sweep inputs for t = -T_in..0 and three-state
/// targets for t = 0..T_out, all on one grid in the t = 0 ego frame.
/// The sequence id and anchor frame travel in the dataset manifest; equality
/// compares grid content only.
struct Sample {
  std::string sequence_id;
  std::int64_t t0_frame = 0;
  std::vector<OccupancyGrid> inputs;
  std::vector<OccupancyGrid> targets;

  int t_in() const { return static_cast<int>(inputs.size()) - 1; }
  int t_out() const { return static_cast<int>(targets.size()) - 1; }
  const GridSpec& spec() const { return targets.front().spec(); }

  bool operator==(const Sample& other) const {
    return inputs == other.inputs && targets == other.targets;
  }
};

/// Throws ConsistencyError when the sample invariants do not hold.
void validate(const Sample& sample);

}  // namespace ocf
