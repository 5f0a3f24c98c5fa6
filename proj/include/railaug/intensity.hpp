// Copyright 2026 The railaug Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <map>
#include <span>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "railaug/types.hpp"

namespace railaug {

struct IntensityBounds {
  double lo = 0.0;
  double hi = 1.0;
};

// Per-sensor percentile bounds; lo < hi for every sensor.
struct SensorNorm {
  std::map<std::string, IntensityBounds> sensors;
};

// Linear-interpolated percentile (same convention as numpy's default).
double percentile(std::span<const float> values, double pct);

// Throws InvalidInputError for bad percentiles, a sensor without points, or
// a degenerate (lo >= hi) intensity range.
SensorNorm fit_sensor_norm(std::span<const LabeledFrame> frames,
                           double lo_pct = 1.0, double hi_pct = 99.0);

// clamp((i - lo) / (hi - lo), 0, 1). Throws LookupError for unknown
// sensors.
LabeledFrame normalize_intensity(const LabeledFrame& frame,
                                 const SensorNorm& norm);

nlohmann::json to_json(const SensorNorm& norm);
SensorNorm sensor_norm_from_json(const nlohmann::json& j);

}  // namespace railaug
