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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace railaug {

enum class Split { kTrain, kVal, kTest };

const char* to_string(Split split);
Split parse_split(const std::string& s);

struct Provenance {
  std::string source_frame;
  std::uint64_t seed = 0;
  std::uint64_t pass = 0;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct ManifestEntry {
  std::string id;
  Split split = Split::kTrain;
  std::string path;  // relative to the manifest directory unless absolute
  std::string sensor;
  std::optional<Provenance> provenance;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetManifest {
  std::vector<ManifestEntry> frames;
  std::string class_map_ref;  // empty: built-in class map
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::string& path) const;
  std::vector<const ManifestEntry*> split(Split s) const;
};

// Throws InvalidInputError on duplicate ids or unknown split values.
DatasetManifest manifest_from_json(const nlohmann::json& j,
                                   const std::filesystem::path& base_dir = {});
nlohmann::json to_json(const DatasetManifest& manifest);

DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& manifest,
                   const std::filesystem::path& path);

}  // namespace railaug
