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

#include "railaug/intensity.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>

#include "railaug/error.hpp"

namespace railaug {

double percentile(std::span<const float> values, double pct) {
  if (values.empty()) throw InvalidInputError("percentile of an empty sequence");
  std::vector<float> v(values.begin(), values.end());
  const double rank = pct / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo_idx = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi_idx = std::min(lo_idx + 1, v.size() - 1);
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(lo_idx), v.end());
  const double lo = v[lo_idx];
  double hi = lo;
  if (hi_idx != lo_idx) {
    hi = *std::min_element(v.begin() + static_cast<std::ptrdiff_t>(hi_idx), v.end());
  }
  return lo + (rank - static_cast<double>(lo_idx)) * (hi - lo);
}

SensorNorm fit_sensor_norm(std::span<const LabeledFrame> frames, double lo_pct,
                           double hi_pct) {
  if (!(lo_pct >= 0.0 && lo_pct < hi_pct && hi_pct <= 100.0)) {
    throw InvalidInputError("fit_sensor_norm: need 0 <= lo_pct < hi_pct <= 100");
  }
  std::map<std::string, std::vector<float>> by_sensor;
  for (const auto& f : frames) {
    auto& v = by_sensor[f.sensor_id];
    v.insert(v.end(), f.intensity.begin(), f.intensity.end());
  }
  SensorNorm norm;
  for (const auto& [sensor, values] : by_sensor) {
    if (values.empty()) {
      throw InvalidInputError("fit_sensor_norm: sensor '" + sensor + "' has no points");
    }
    IntensityBounds b{percentile(values, lo_pct), percentile(values, hi_pct)};
    if (!(b.lo < b.hi)) {
      throw InvalidInputError("fit_sensor_norm: sensor '" + sensor +
                              "' has a degenerate intensity range");
    }
    norm.sensors.emplace(sensor, b);
  }
  return norm;
}

LabeledFrame normalize_intensity(const LabeledFrame& frame, const SensorNorm& norm) {
  auto it = norm.sensors.find(frame.sensor_id);
  if (it == norm.sensors.end()) {
    throw LookupError("no intensity normalization for sensor '" + frame.sensor_id + "'");
  }
  const double lo = it->second.lo;
  const double scale = 1.0 / (it->second.hi - lo);
  LabeledFrame out = frame;
  for (auto& v : out.intensity) {
    v = static_cast<float>(std::clamp((static_cast<double>(v) - lo) * scale, 0.0, 1.0));
  }
  return out;
}

nlohmann::json to_json(const SensorNorm& norm) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [sensor, b] : norm.sensors) {
    j[sensor] = {{"lo", b.lo}, {"hi", b.hi}};
  }
  return j;
}

SensorNorm sensor_norm_from_json(const nlohmann::json& j) {
  SensorNorm norm;
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      IntensityBounds b{it->at("lo").get<double>(), it->at("hi").get<double>()};
      if (!(b.lo < b.hi)) {
        throw InvalidInputError("sensor norm: lo >= hi for '" + it.key() + "'");
      }
      norm.sensors.emplace(it.key(), b);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError(std::string("sensor norm json: ") + e.what());
  }
  return norm;
}

}  // namespace railaug
