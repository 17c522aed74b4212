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

#include <string>
#include <vector>

#include "core/grids.hpp"

namespace ocf {

/// Repeats a completed t = 0 grid over the horizon: 1 where OCCUPIED, 0 where
/// FREE, 0.5 where UNKNOWN. Fed the ground-truth t = 0 target it is an oracle
/// reference, not a deployable forecaster.
std::vector<ProbabilityGrid> static_world_forecast(const OccupancyGrid& completed_t0, int t_out);

/// Repeats the t = 0 input sweep as {0, 1} probabilities.
std::vector<ProbabilityGrid> input_persistence_forecast(const Sample& sample);

/// Repeats the union of all input sweeps as {0, 1} probabilities.
std::vector<ProbabilityGrid> input_union_forecast(const Sample& sample);

enum class BaselineMethod { kStaticWorld, kPersistence, kUnion };

BaselineMethod baseline_from_string(const std::string& name);
const char* to_string(BaselineMethod m);
/// True for methods that read ground truth.
bool is_oracle(BaselineMethod m);

std::vector<ProbabilityGrid> run_baseline(BaselineMethod m, const Sample& sample);

}  // namespace ocf
