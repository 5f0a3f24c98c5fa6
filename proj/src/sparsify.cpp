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

#include "railaug/sparsify.hpp"

#include <algorithm>
#include <cmath>

#include "railaug/error.hpp"
#include "railaug/geometry.hpp"

namespace railaug {

void SparsifyParams::validate() const {
  if (!(window > 0.0)) throw InvalidInputError("sparsify: window width must be > 0");
  if (!(d_max > 0.0)) throw InvalidInputError("sparsify: d_max must be > 0");
  if (!(probability >= 0.0 && probability <= 1.0)) {
    throw InvalidInputError("sparsify: probability must lie in [0, 1]");
  }
}

std::size_t window_count(std::span<const double> distances, double lo, double hi) {
  return static_cast<std::size_t>(std::count_if(
      distances.begin(), distances.end(), [&](double d) { return d >= lo && d < hi; }));
}

namespace {

std::vector<double> distances_of(const Instance& instance) {
  std::vector<double> d(instance.size());
  for (std::size_t i = 0; i < instance.size(); ++i) d[i] = planar_distance(instance.points[i]);
  return d;
}

}  // namespace

std::size_t window_count(const Instance& instance, double lo, double hi) {
  return window_count(distances_of(instance), lo, hi);
}

SparsifyWindow resolve_window(std::span<const double> distances,
                              const SparsifyParams& params) {
  SparsifyWindow w;
  if (distances.empty()) return w;
  w.d_eff = std::min(params.d_max, *std::max_element(distances.begin(), distances.end()));
  w.c_max = window_count(distances, w.d_eff - params.window, w.d_eff);
  return w;
}

std::vector<bool> sparsify_keep_mask(std::span<const double> distances,
                                     const SparsifyParams& params, Rng& rng) {
  params.validate();
  std::vector<bool> keep(distances.size(), true);
  if (distances.empty()) return keep;
  const SparsifyWindow w = resolve_window(distances, params);

  std::vector<std::size_t> members;
  // Upper bounds are recomputed from d_eff each step so no error accumulates.
  for (std::size_t k = 1;; ++k) {
    const double hi = w.d_eff - static_cast<double>(k) * params.window;
    if (!(hi > 0.0)) break;
    const double lo = std::max(hi - params.window, 0.0);
    members.clear();
    for (std::size_t i = 0; i < distances.size(); ++i) {
      if (distances[i] >= lo && distances[i] < hi) members.push_back(i);
    }
    if (members.size() <= w.c_max) continue;
    const std::size_t excess = members.size() - w.c_max;
    for (std::size_t pick : sample_without_replacement(rng, members.size(), excess)) {
      keep[members[pick]] = false;
    }
  }
  return keep;
}

Instance sparsify_instance(const Instance& instance, const SparsifyParams& params,
                           Rng& rng) {
  if (instance.empty()) return instance;
  const std::vector<bool> keep = sparsify_keep_mask(distances_of(instance), params, rng);
  Instance out;
  out.class_id = instance.class_id;
  out.source_frame = instance.source_frame;
  out.source_instance_id = instance.source_instance_id;
  for (std::size_t i = 0; i < instance.size(); ++i) {
    if (!keep[i]) continue;
    out.points.push_back(instance.points[i]);
    out.intensity.push_back(instance.intensity[i]);
  }
  return out;
}

LabeledFrame sparsify_all_tracks(const LabeledFrame& frame, const SparsifyParams& params,
                                 Rng& rng) {
  params.validate();
  std::vector<bool> keep(frame.size(), true);
  bool removed_any = false;
  std::vector<double> distances;
  for (const auto& group : group_instance_indices(frame, params.track_class)) {
    distances.resize(group.indices.size());
    for (std::size_t j = 0; j < group.indices.size(); ++j) {
      distances[j] = planar_distance(frame.points[group.indices[j]]);
    }
    const std::vector<bool> mask = sparsify_keep_mask(distances, params, rng);
    for (std::size_t j = 0; j < mask.size(); ++j) {
      if (!mask[j]) {
        keep[group.indices[j]] = false;
        removed_any = true;
      }
    }
  }
  if (!removed_any) return frame;
  LabeledFrame out;
  out.frame_id = frame.frame_id;
  out.sensor_id = frame.sensor_id;
  out.reserve(frame.size());
  for (std::size_t i = 0; i < frame.size(); ++i) {
    if (keep[i]) {
      out.push_back(frame.points[i], frame.intensity[i], frame.labels[i],
                    frame.instance_ids[i]);
    }
  }
  return out;
}

LabeledFrame sparsify_frame(const LabeledFrame& frame, const SparsifyParams& params,
                            Rng& rng) {
  params.validate();
  if (!bernoulli(rng, params.probability)) return frame;
  return sparsify_all_tracks(frame, params, rng);
}

}  // namespace railaug
