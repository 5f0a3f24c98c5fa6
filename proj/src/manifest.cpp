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

#include "railaug/manifest.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "railaug/error.hpp"

namespace railaug {

const char* to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "train";
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  throw InvalidInputError("unknown split '" + s + "' (expected train, val or test)");
}

std::filesystem::path DatasetManifest::resolve(const std::string& path) const {
  std::filesystem::path p(path);
  if (p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

std::vector<const ManifestEntry*> DatasetManifest::split(Split s) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : frames) {
    if (e.split == s) out.push_back(&e);
  }
  return out;
}

DatasetManifest manifest_from_json(const nlohmann::json& j,
                                   const std::filesystem::path& base_dir) {
  DatasetManifest m;
  m.base_dir = base_dir;
  std::set<std::string> ids;
  try {
    m.class_map_ref = j.value("class_map", std::string{});
    for (const auto& f : j.at("frames")) {
      ManifestEntry e;
      e.id = f.at("id").get<std::string>();
      e.split = parse_split(f.at("split").get<std::string>());
      e.path = f.at("path").get<std::string>();
      e.sensor = f.value("sensor", std::string{});
      if (f.contains("source")) {
        Provenance p;
        p.source_frame = f.at("source").get<std::string>();
        p.seed = f.value("seed", std::uint64_t{0});
        p.pass = f.value("pass", std::uint64_t{0});
        e.provenance = p;
      }
      if (!ids.insert(e.id).second) {
        throw InvalidInputError("manifest: duplicate frame id '" + e.id + "'");
      }
      m.frames.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError(std::string("manifest json: ") + e.what());
  }
  return m;
}

nlohmann::json to_json(const DatasetManifest& manifest) {
  nlohmann::json j;
  if (!manifest.class_map_ref.empty()) j["class_map"] = manifest.class_map_ref;
  j["frames"] = nlohmann::json::array();
  for (const auto& e : manifest.frames) {
    nlohmann::json f;
    f["id"] = e.id;
    f["split"] = to_string(e.split);
    f["path"] = e.path;
    f["sensor"] = e.sensor;
    if (e.provenance) {
      f["source"] = e.provenance->source_frame;
      f["seed"] = e.provenance->seed;
      f["pass"] = e.provenance->pass;
    }
    j["frames"].push_back(std::move(f));
  }
  return j;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError("manifest '" + path.string() + "': " + e.what());
  }
  return manifest_from_json(j, path.parent_path());
}

void save_manifest(const DatasetManifest& manifest,
                   const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write manifest '" + path.string() + "'");
  out << to_json(manifest).dump(2) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace railaug
