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

#include <span>
#include <vector>

#include "railaug/types.hpp"

namespace railaug {

// sqrt(x^2 + y^2); z is ignored. Non-finite input throws InvalidInputError.
double planar_distance(const Point3d& p);
double planar_distance(const Point3f& p);

Point3d to_double(const Point3f& p) noexcept;
Point3f to_float(const Point3d& p) noexcept;

Point3d centroid(const Instance& instance);

// Tight planar box over the instance points. Throws InvalidInputError on an
// empty instance.
Aabb2D footprint(const Instance& instance);

// Groups the points of class_id by instance id, ascending. Class points
// without an instance (id -1) form one synthetic instance.
std::vector<Instance> extract_instances(const LabeledFrame& frame,
                                        ClassId class_id);

// Same grouping as extract_instances, as point indices into the frame.
struct InstanceIndices {
  InstanceId instance_id = kNoInstance;
  std::vector<std::size_t> indices;
};
std::vector<InstanceIndices> group_instance_indices(const LabeledFrame& frame,
                                                    ClassId class_id);

// Copies the selected points out of a frame.
Instance gather_instance(const LabeledFrame& frame, ClassId class_id,
                         InstanceId instance_id,
                         std::span<const std::size_t> indices);

}  // namespace railaug
