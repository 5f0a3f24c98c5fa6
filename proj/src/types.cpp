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

#include "railaug/types.hpp"

#include <string>
#include <unordered_map>

#include "railaug/error.hpp"

namespace railaug {

void LabeledFrame::reserve(std::size_t n) {
  points.reserve(n);
  intensity.reserve(n);
  labels.reserve(n);
  instance_ids.reserve(n);
}

void LabeledFrame::push_back(const Point3f& p, float intensity_value,
                             ClassId label, InstanceId instance) {
  points.push_back(p);
  intensity.push_back(intensity_value);
  labels.push_back(label);
  instance_ids.push_back(instance);
}

void validate_frame(const LabeledFrame& frame, int num_classes) {
  const std::size_t n = frame.points.size();
  if (frame.intensity.size() != n || frame.labels.size() != n ||
      frame.instance_ids.size() != n) {
    throw InvalidInputError("frame '" + frame.frame_id +
                            "': per-point sequences differ in length");
  }
  std::unordered_map<InstanceId, ClassId> owner;
  for (std::size_t i = 0; i < n; ++i) {
    const ClassId label = frame.labels[i];
    if (label != kUnlabeled && (label < 0 || label >= num_classes)) {
      throw InvalidInputError("frame '" + frame.frame_id + "': label " +
                              std::to_string(label) + " at point " +
                              std::to_string(i) + " is out of range");
    }
    const InstanceId inst = frame.instance_ids[i];
    if (inst < kNoInstance) {
      throw InvalidInputError("frame '" + frame.frame_id + "': instance id " +
                              std::to_string(inst) + " at point " +
                              std::to_string(i) + " is below -1");
    }
    if (inst == kNoInstance) continue;
    auto [it, inserted] = owner.emplace(inst, label);
    if (!inserted && it->second != label) {
      throw InvalidInputError("frame '" + frame.frame_id + "': instance " +
                              std::to_string(inst) +
                              " is shared by two classes");
    }
  }
}

}  // namespace railaug
