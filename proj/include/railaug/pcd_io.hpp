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
#include <iosfwd>
#include <string>

#include "railaug/types.hpp"

namespace railaug {

enum class PcdFormat { kAscii, kBinary };

// PCD v0.7 with FIELDS x y z intensity label instance (SIZE 4, TYPE F F F F
// I I). frame and sensor ids travel as "# frame <id>" / "# sensor <id>"
// header comments.
//
// The reader accepts any field order and extra scalar fields, requires
// x y z intensity, and fills missing label/instance columns with -1.
LabeledFrame read_frame(const std::filesystem::path& path);
LabeledFrame parse_frame(std::string_view bytes, const std::string& fallback_id = {});

void write_frame(const LabeledFrame& frame, const std::filesystem::path& path,
                 PcdFormat format = PcdFormat::kBinary);
std::string serialize_frame(const LabeledFrame& frame,
                            PcdFormat format = PcdFormat::kBinary);

}  // namespace railaug
