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

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "railaug/class_map.hpp"
#include "railaug/metrics.hpp"

namespace railaug {

// Text exports of the evaluation results. CSV cells carry two decimals,
// absent values are empty; JSON carries full precision with null for
// absent.

// One header row of class names plus "mIoU", one value row.
std::string iou_table_csv(std::span<const OptionalPercent> ious, double miou_value,
                          const ClassMap& map);

// class,mean_riou,r0-20,r20-40,...
std::string riou_table_csv(const RIoUReport& report, const ClassMap& map);

nlohmann::json iou_json(std::span<const OptionalPercent> ious,
                        std::optional<double> miou_value, const ClassMap& map);
nlohmann::json riou_json(const RIoUReport& report, const ClassMap& map);

// "# recall_grid ..." header line, then ix,iy,x_min,y_min,tp,fn,recall for
// populated cells.
std::string recall_grid_csv(const RecallGrid& grid);
RecallGrid parse_recall_grid_csv(const std::string& text);
RecallGrid load_recall_grid(const std::filesystem::path& path);

// Binary P5, one pixel per cell, column = ix, top row = highest y.
// Recall maps to round(254 r); absent cells are 255.
std::string recall_grid_pgm(const RecallGrid& grid);

// "# recall_diff ..." header line, then ix,iy,x_min,y_min,diff for cells
// populated in both grids.
std::string recall_diff_csv(const RecallDiff& diff);
// 128 + round(127 d), so -1 -> 1, 0 -> 128, +1 -> 255; absent cells are 0.
std::string recall_diff_pgm(const RecallDiff& diff);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace railaug
