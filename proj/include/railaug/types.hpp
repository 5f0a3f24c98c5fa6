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

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace railaug {

using ClassId = std::int32_t;
using InstanceId = std::int32_t;

inline constexpr ClassId kUnlabeled = -1;
inline constexpr InstanceId kNoInstance = -1;

// Training class ids, in class-map row order.
namespace cls {
inline constexpr ClassId kBackground = 0;
inline constexpr ClassId kPerson = 1;
inline constexpr ClassId kTrain = 2;
inline constexpr ClassId kRoadVehicle = 3;
inline constexpr ClassId kTrack = 4;
inline constexpr ClassId kCatenaryPole = 5;
inline constexpr ClassId kSignal = 6;
inline constexpr ClassId kBufferStop = 7;
inline constexpr int kCount = 8;
}  // namespace cls

// Sensor frame: x forward, y left, z up, meters.
struct Point3f {
  float x = 0.0f;
  float y = 0.0f;
  float z = 0.0f;

  friend bool operator==(const Point3f&, const Point3f&) = default;
};

struct Point3d {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Point3d&, const Point3d&) = default;
};

// One LiDAR scan with per-point class label and instance id. All four
// per-point sequences are aligned.
struct LabeledFrame {
  std::string frame_id;
  std::string sensor_id;
  std::vector<Point3f> points;
  std::vector<float> intensity;
  std::vector<ClassId> labels;
  std::vector<InstanceId> instance_ids;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }

  void reserve(std::size_t n);
  void push_back(const Point3f& p, float intensity_value, ClassId label,
                 InstanceId instance);

  friend bool operator==(const LabeledFrame&, const LabeledFrame&) = default;
};

// Throws InvalidInputError if the aligned sequences differ in length, a
// label lies outside [0, num_classes) and is not kUnlabeled, an instance id
// is below -1, or one instance id is shared by two classes.
void validate_frame(const LabeledFrame& frame, int num_classes = cls::kCount);

// Points of one annotated object. Coordinates are kept in double so rigid
// transforms stay exact to well below a micrometer.
struct Instance {
  ClassId class_id = kUnlabeled;
  std::vector<Point3d> points;
  std::vector<float> intensity;
  std::string source_frame;
  InstanceId source_instance_id = kNoInstance;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
};

// Planar axis-aligned box, closed on all sides.
struct Aabb2D {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;

  bool contains(double x, double y) const noexcept {
    return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
  }

  friend bool operator==(const Aabb2D&, const Aabb2D&) = default;
};

}  // namespace railaug
