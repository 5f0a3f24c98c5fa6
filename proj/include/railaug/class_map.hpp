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
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "railaug/types.hpp"

namespace railaug {

inline constexpr const char* kUnlabeledName = "unlabeled";

// Original annotation class -> training class, with a discard set.
class ClassMap {
 public:
  ClassMap() = default;
  // Throws InvalidInputError when the invariants do not hold: entries and
  // discard disjoint, every mapped name has an id, ids contiguous from 0.
  ClassMap(std::map<std::string, std::string> entries,
           std::set<std::string> discard,
           std::map<std::string, ClassId> class_ids);

  const std::map<std::string, std::string>& entries() const { return entries_; }
  const std::set<std::string>& discard() const { return discard_; }
  const std::map<std::string, ClassId>& class_ids() const { return class_ids_; }

  int num_classes() const { return static_cast<int>(class_ids_.size()); }
  bool is_discarded(const std::string& original) const;

  // Training id for an original (or already mapped) class name. Returns
  // kUnlabeled for the unlabeled marker. Throws MappingError for names
  // that are neither mapped, discarded, nor a training class, and for
  // discarded names.
  ClassId id_of(const std::string& original) const;

  // Training class name for an id; throws LookupError if unknown.
  const std::string& name_of(ClassId id) const;

  // Accepts a training class name or a decimal id.
  ClassId resolve(const std::string& name_or_id) const;

 private:
  std::map<std::string, std::string> entries_;
  std::set<std::string> discard_;
  std::map<std::string, ClassId> class_ids_;
  std::vector<std::string> names_by_id_;
};

// Table of the railway dataset: person/crowd -> person, switch discarded, ...
const ClassMap& osdar23_class_map();

// {entries{}, discard[], ids{}}
nlohmann::json to_json(const ClassMap& map);
ClassMap class_map_from_json(const nlohmann::json& j);
ClassMap load_class_map(const std::string& path);

// A point may carry several overlapping annotations, listed in priority
// order (first wins).
struct Annotation {
  std::string class_name;
  InstanceId instance_id = kNoInstance;
};

struct AnnotatedFrame {
  std::string frame_id;
  std::string sensor_id;
  std::vector<Point3f> points;
  std::vector<float> intensity;
  std::vector<std::vector<Annotation>> annotations;
};

// Ids are assigned from the first retained annotation of each point.
// Discarded annotations are dropped first; a point left with none becomes
// background and loses its instance. A point with no annotation at all (or
// only the unlabeled marker) becomes kUnlabeled.
LabeledFrame apply_class_map(const AnnotatedFrame& frame, const ClassMap& map);

// Inverse view of a mapped frame: one annotation per point with the
// training class name, so apply_class_map(to_annotated(f)) == f.
AnnotatedFrame to_annotated(const LabeledFrame& frame, const ClassMap& map);

}  // namespace railaug
