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

#include "railaug/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "railaug/error.hpp"

namespace railaug {

double planar_distance(const Point3d& p) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
    throw InvalidInputError("planar_distance: non-finite coordinate");
  }
  return std::hypot(p.x, p.y);
}

double planar_distance(const Point3f& p) { return planar_distance(to_double(p)); }

Point3d to_double(const Point3f& p) noexcept {
  return {static_cast<double>(p.x), static_cast<double>(p.y),
          static_cast<double>(p.z)};
}

Point3f to_float(const Point3d& p) noexcept {
  return {static_cast<float>(p.x), static_cast<float>(p.y),
          static_cast<float>(p.z)};
}

Point3d centroid(const Instance& instance) {
  if (instance.empty()) {
    throw InvalidInputError("centroid: empty instance");
  }
  Point3d c;
  for (const auto& p : instance.points) {
    c.x += p.x;
    c.y += p.y;
    c.z += p.z;
  }
  const double n = static_cast<double>(instance.size());
  return {c.x / n, c.y / n, c.z / n};
}

Aabb2D footprint(const Instance& instance) {
  if (instance.empty()) {
    throw InvalidInputError("footprint: empty instance");
  }
  Aabb2D box{std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity(),
             std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity()};
  for (const auto& p : instance.points) {
    box.x_min = std::min(box.x_min, p.x);
    box.x_max = std::max(box.x_max, p.x);
    box.y_min = std::min(box.y_min, p.y);
    box.y_max = std::max(box.y_max, p.y);
  }
  return box;
}

std::vector<InstanceIndices> group_instance_indices(const LabeledFrame& frame,
                                                    ClassId class_id) {
  std::map<InstanceId, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < frame.size(); ++i) {
    if (frame.labels[i] == class_id) {
      groups[frame.instance_ids[i]].push_back(i);
    }
  }
  std::vector<InstanceIndices> out;
  out.reserve(groups.size());
  for (auto& [id, indices] : groups) {
    out.push_back({id, std::move(indices)});
  }
  return out;
}

Instance gather_instance(const LabeledFrame& frame, ClassId class_id,
                         InstanceId instance_id,
                         std::span<const std::size_t> indices) {
  Instance inst;
  inst.class_id = class_id;
  inst.source_frame = frame.frame_id;
  inst.source_instance_id = instance_id;
  inst.points.reserve(indices.size());
  inst.intensity.reserve(indices.size());
  for (std::size_t i : indices) {
    inst.points.push_back(to_double(frame.points[i]));
    inst.intensity.push_back(frame.intensity[i]);
  }
  return inst;
}

std::vector<Instance> extract_instances(const LabeledFrame& frame,
                                        ClassId class_id) {
  std::vector<Instance> out;
  for (const auto& group : group_instance_indices(frame, class_id)) {
    out.push_back(
        gather_instance(frame, class_id, group.instance_id, group.indices));
  }
  return out;
}

}  // namespace railaug
