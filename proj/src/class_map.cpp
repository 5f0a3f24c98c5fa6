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

#include "railaug/class_map.hpp"

#include <charconv>
#include <fstream>

#include <nlohmann/json.hpp>

#include "railaug/error.hpp"

namespace railaug {

ClassMap::ClassMap(std::map<std::string, std::string> entries,
                   std::set<std::string> discard,
                   std::map<std::string, ClassId> class_ids)
    : entries_(std::move(entries)),
      discard_(std::move(discard)),
      class_ids_(std::move(class_ids)) {
  for (const auto& name : discard_) {
    if (entries_.count(name) != 0) {
      throw InvalidInputError("class map: '" + name +
                              "' is both mapped and discarded");
    }
  }
  for (const auto& [original, mapped] : entries_) {
    if (class_ids_.count(mapped) == 0) {
      throw InvalidInputError("class map: mapped class '" + mapped +
                              "' (from '" + original + "') has no id");
    }
  }
  names_by_id_.assign(class_ids_.size(), {});
  std::vector<bool> seen(class_ids_.size(), false);
  for (const auto& [name, id] : class_ids_) {
    if (id < 0 || id >= static_cast<ClassId>(class_ids_.size()) || seen[id]) {
      throw InvalidInputError("class map: ids must be contiguous from 0 (got " +
                              std::to_string(id) + " for '" + name + "')");
    }
    seen[id] = true;
    names_by_id_[id] = name;
  }
}

bool ClassMap::is_discarded(const std::string& original) const {
  return discard_.count(original) != 0;
}

ClassId ClassMap::id_of(const std::string& original) const {
  if (original == kUnlabeledName) return kUnlabeled;
  if (auto it = entries_.find(original); it != entries_.end()) {
    return class_ids_.at(it->second);
  }
  if (auto it = class_ids_.find(original); it != class_ids_.end()) {
    return it->second;
  }
  if (is_discarded(original)) {
    throw MappingError("class '" + original + "' is discarded");
  }
  throw MappingError("unknown original class '" + original + "'");
}

const std::string& ClassMap::name_of(ClassId id) const {
  if (id < 0 || id >= static_cast<ClassId>(names_by_id_.size())) {
    throw LookupError("unknown class id " + std::to_string(id));
  }
  return names_by_id_[id];
}

ClassId ClassMap::resolve(const std::string& name_or_id) const {
  ClassId id = 0;
  const char* first = name_or_id.data();
  const char* last = first + name_or_id.size();
  if (auto [ptr, ec] = std::from_chars(first, last, id);
      ec == std::errc{} && ptr == last) {
    name_of(id);
    return id;
  }
  if (auto it = class_ids_.find(name_or_id); it != class_ids_.end()) {
    return it->second;
  }
  throw LookupError("unknown class '" + name_or_id + "'");
}

const ClassMap& osdar23_class_map() {
  static const ClassMap map(
      {
          {"person", "person"},
          {"crowd", "person"},
          {"train", "train"},
          {"wagons", "train"},
          {"bicycle", "background"},
          {"animal", "background"},
          {"signal_bridge", "background"},
          {"transition", "track"},
          {"track", "track"},
          {"road_vehicle", "road_vehicle"},
          {"catenary_pole", "catenary_pole"},
          {"signal_pole", "signal"},
          {"signal", "signal"},
          {"buffer_stop", "buffer_stop"},
      },
      {"switch"},
      {
          {"background", cls::kBackground},
          {"person", cls::kPerson},
          {"train", cls::kTrain},
          {"road_vehicle", cls::kRoadVehicle},
          {"track", cls::kTrack},
          {"catenary_pole", cls::kCatenaryPole},
          {"signal", cls::kSignal},
          {"buffer_stop", cls::kBufferStop},
      });
  return map;
}

nlohmann::json to_json(const ClassMap& map) {
  nlohmann::json j;
  j["entries"] = map.entries();
  j["discard"] = map.discard();
  j["ids"] = map.class_ids();
  return j;
}

ClassMap class_map_from_json(const nlohmann::json& j) {
  try {
    return ClassMap(j.at("entries").get<std::map<std::string, std::string>>(),
                    j.value("discard", std::set<std::string>{}),
                    j.at("ids").get<std::map<std::string, ClassId>>());
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError(std::string("class map json: ") + e.what());
  }
}

ClassMap load_class_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open class map '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError("class map '" + path + "': " + e.what());
  }
  return class_map_from_json(j);
}

LabeledFrame apply_class_map(const AnnotatedFrame& frame, const ClassMap& map) {
  const std::size_t n = frame.points.size();
  if (frame.intensity.size() != n || frame.annotations.size() != n) {
    throw InvalidInputError("annotated frame '" + frame.frame_id +
                            "': per-point sequences differ in length");
  }
  LabeledFrame out;
  out.frame_id = frame.frame_id;
  out.sensor_id = frame.sensor_id;
  out.points = frame.points;
  out.intensity = frame.intensity;
  out.labels.resize(n);
  out.instance_ids.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& annotations = frame.annotations[i];
    ClassId label = kUnlabeled;
    InstanceId instance = kNoInstance;
    bool any_discarded = false;
    bool assigned = false;
    for (const auto& a : annotations) {
      if (map.is_discarded(a.class_name)) {
        any_discarded = true;
        continue;
      }
      const ClassId id = map.id_of(a.class_name);
      if (id == kUnlabeled || assigned) continue;
      label = id;
      instance = a.instance_id;
      assigned = true;
    }
    if (!assigned && any_discarded) label = cls::kBackground;
    out.labels[i] = label;
    out.instance_ids[i] = instance;
  }
  return out;
}

AnnotatedFrame to_annotated(const LabeledFrame& frame, const ClassMap& map) {
  AnnotatedFrame out;
  out.frame_id = frame.frame_id;
  out.sensor_id = frame.sensor_id;
  out.points = frame.points;
  out.intensity = frame.intensity;
  out.annotations.resize(frame.size());
  for (std::size_t i = 0; i < frame.size(); ++i) {
    if (frame.labels[i] == kUnlabeled) continue;
    out.annotations[i].push_back(
        {map.name_of(frame.labels[i]), frame.instance_ids[i]});
  }
  return out;
}

}  // namespace railaug
