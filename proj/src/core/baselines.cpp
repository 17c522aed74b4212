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

#include "core/baselines.hpp"

#include "core/errors.hpp"

namespace ocf {

namespace {

ProbabilityGrid binary_probs(const OccupancyGrid& g) {
  std::vector<float> probs(g.size(), 0.0f);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.at(i) == CellState::kOccupied) probs[i] = 1.0f;
  }
  return {g.spec(), std::move(probs)};
}

std::vector<ProbabilityGrid> repeat(const ProbabilityGrid& g, int t_out) {
  if (t_out < 0) throw ConfigError("T_out must be non-negative");
  return std::vector<ProbabilityGrid>(static_cast<std::size_t>(t_out) + 1, g);
}

}  // namespace

std::vector<ProbabilityGrid> static_world_forecast(const OccupancyGrid& completed_t0, int t_out) {
  std::vector<float> probs(completed_t0.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    switch (completed_t0.at(i)) {
      case CellState::kOccupied: probs[i] = 1.0f; break;
      case CellState::kFree: probs[i] = 0.0f; break;
      case CellState::kUnknown: probs[i] = 0.5f; break;
    }
  }
  return repeat(ProbabilityGrid(completed_t0.spec(), std::move(probs)), t_out);
}

std::vector<ProbabilityGrid> input_persistence_forecast(const Sample& sample) {
  validate(sample);
  return repeat(binary_probs(sample.inputs.back()), sample.t_out());
}

std::vector<ProbabilityGrid> input_union_forecast(const Sample& sample) {
  validate(sample);
  OccupancyGrid u = sample.inputs.front();
  for (const auto& g : sample.inputs) u.merge_max(g);
  return repeat(binary_probs(u), sample.t_out());
}

BaselineMethod baseline_from_string(const std::string& name) {
  if (name == "static-world") return BaselineMethod::kStaticWorld;
  if (name == "persistence") return BaselineMethod::kPersistence;
  if (name == "union") return BaselineMethod::kUnion;
  throw ConfigError("unknown baseline '" + name + "', expected static-world, persistence or union");
}

const char* to_string(BaselineMethod m) {
  switch (m) {
    case BaselineMethod::kStaticWorld: return "static-world";
    case BaselineMethod::kPersistence: return "persistence";
    case BaselineMethod::kUnion: return "union";
  }
  return "static-world";
}

bool is_oracle(BaselineMethod m) { return m == BaselineMethod::kStaticWorld; }

std::vector<ProbabilityGrid> run_baseline(BaselineMethod m, const Sample& sample) {
  switch (m) {
    case BaselineMethod::kStaticWorld:
      validate(sample);
      return static_world_forecast(sample.targets.front(), sample.t_out());
    case BaselineMethod::kPersistence: return input_persistence_forecast(sample);
    case BaselineMethod::kUnion: return input_union_forecast(sample);
  }
  throw InternalError("unhandled baseline");
}

}  // namespace ocf
