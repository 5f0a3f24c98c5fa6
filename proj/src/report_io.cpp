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

#include "railaug/report_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "railaug/error.hpp"

namespace railaug {
namespace {

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string opt2(const std::optional<double>& v) { return v ? fixed2(*v) : std::string{}; }

// Shortest decimal text that round-trips the double.
std::string exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string edge_label(double v) {
  char buf[32];
  if (v == std::floor(v)) {
    std::snprintf(buf, sizeof(buf), "%.0f", v);
  } else {
    std::snprintf(buf, sizeof(buf), "%g", v);
  }
  return buf;
}

std::string spec_line(const char* tag, const GridSpec& s, ClassId class_id) {
  return std::string("# ") + tag + " x_min=" + exact(s.x_min) + " x_max=" + exact(s.x_max) +
         " y_min=" + exact(s.y_min) + " y_max=" + exact(s.y_max) + " cell=" + exact(s.cell) +
         " class=" + std::to_string(class_id) + "\n";
}

nlohmann::json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string pgm_header(const GridSpec& s) {
  return "P5\n" + std::to_string(s.nx()) + " " + std::to_string(s.ny()) + "\n255\n";
}

template <typename ValueOf>
std::string pgm_raster(const GridSpec& s, ValueOf value_of) {
  std::string out = pgm_header(s);
  for (int row = 0; row < s.ny(); ++row) {
    const int iy = s.ny() - 1 - row;
    for (int ix = 0; ix < s.nx(); ++ix) {
      out.push_back(static_cast<char>(value_of(iy * s.nx() + ix)));
    }
  }
  return out;
}

}  // namespace

std::string iou_table_csv(std::span<const OptionalPercent> ious, double miou_value,
                          const ClassMap& map) {
  std::string header, row;
  for (std::size_t c = 0; c < ious.size(); ++c) {
    header += map.name_of(static_cast<ClassId>(c)) + ",";
    row += opt2(ious[c]) + ",";
  }
  return header + "mIoU\n" + row + fixed2(miou_value) + "\n";
}

std::string riou_table_csv(const RIoUReport& report, const ClassMap& map) {
  std::string out = "class,mean_riou";
  for (int b = 0; b < report.binning.num_bins(); ++b) {
    out += ",r" + edge_label(report.binning.lo(b)) + "-" + edge_label(report.binning.hi(b));
  }
  out += "\n";
  for (const auto& c : report.classes) {
    out += map.name_of(c.class_id) + "," + opt2(c.mean);
    for (const auto& v : c.per_bin) out += "," + opt2(v);
    out += "\n";
  }
  return out;
}

nlohmann::json iou_json(std::span<const OptionalPercent> ious, std::optional<double> miou_value,
                        const ClassMap& map) {
  nlohmann::json j;
  nlohmann::json per = nlohmann::json::object();
  for (std::size_t c = 0; c < ious.size(); ++c) {
    per[map.name_of(static_cast<ClassId>(c))] = opt_json(ious[c]);
  }
  j["iou"] = per;
  j["miou"] = opt_json(miou_value);
  return j;
}

nlohmann::json riou_json(const RIoUReport& report, const ClassMap& map) {
  nlohmann::json j;
  j["edges"] = report.binning.edges();
  j["mode"] = report.mode == AbsentMode::kStrict ? "strict" : "skip";
  nlohmann::json classes = nlohmann::json::object();
  for (const auto& c : report.classes) {
    nlohmann::json bins = nlohmann::json::array();
    for (const auto& v : c.per_bin) bins.push_back(opt_json(v));
    classes[map.name_of(c.class_id)] = {{"bins", bins}, {"mean_riou", opt_json(c.mean)}};
  }
  j["classes"] = classes;
  return j;
}

std::string recall_grid_csv(const RecallGrid& grid) {
  const GridSpec& s = grid.spec();
  std::string out = spec_line("recall_grid", s, grid.class_id());
  out += "ix,iy,x_min,y_min,tp,fn,recall\n";
  for (int iy = 0; iy < s.ny(); ++iy) {
    for (int ix = 0; ix < s.nx(); ++ix) {
      const int c = iy * s.nx() + ix;
      const auto r = grid.recall(c);
      if (!r) continue;
      out += std::to_string(ix) + "," + std::to_string(iy) + "," +
             exact(s.x_min + ix * s.cell) + "," + exact(s.y_min + iy * s.cell) + "," +
             std::to_string(grid.tp(c)) + "," + std::to_string(grid.fn(c)) + "," + exact(*r) +
             "\n";
    }
  }
  return out;
}

RecallGrid parse_recall_grid_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# recall_grid ", 0) != 0) {
    throw InvalidInputError("recall grid csv: missing '# recall_grid' header line");
  }
  std::map<std::string, std::string> kv;
  std::istringstream spec_in(line.substr(14));
  std::string tok;
  while (spec_in >> tok) {
    const auto eq = tok.find('=');
    if (eq != std::string::npos) kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  GridSpec s;
  ClassId class_id = 0;
  try {
    s.x_min = std::stod(kv.at("x_min"));
    s.x_max = std::stod(kv.at("x_max"));
    s.y_min = std::stod(kv.at("y_min"));
    s.y_max = std::stod(kv.at("y_max"));
    s.cell = std::stod(kv.at("cell"));
    class_id = std::stoi(kv.at("class"));
  } catch (const std::exception&) {
    throw InvalidInputError("recall grid csv: malformed header line");
  }
  RecallGrid grid(s, class_id);
  std::getline(in, line);  // column header
  std::size_t row = 2;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string f[7];
    for (auto& x : f) {
      if (!std::getline(fields, x, ',')) {
        throw InvalidInputError("recall grid csv: short row " + std::to_string(row));
      }
    }
    try {
      const int ix = std::stoi(f[0]);
      const int iy = std::stoi(f[1]);
      if (ix < 0 || ix >= s.nx() || iy < 0 || iy >= s.ny()) {
        throw InvalidInputError("recall grid csv: cell outside grid on row " +
                                std::to_string(row));
      }
      const auto c = static_cast<std::size_t>(iy * s.nx() + ix);
      grid.mutable_tp()[c] = std::stoull(f[4]);
      grid.mutable_fn()[c] = std::stoull(f[5]);
    } catch (const std::logic_error&) {
      throw InvalidInputError("recall grid csv: malformed row " + std::to_string(row));
    }
  }
  return grid;
}

RecallGrid load_recall_grid(const std::filesystem::path& path) {
  return parse_recall_grid_csv(read_text(path));
}

std::string recall_grid_pgm(const RecallGrid& grid) {
  return pgm_raster(grid.spec(), [&](int c) -> unsigned {
    const auto r = grid.recall(c);
    if (!r) return 255;
    return static_cast<unsigned>(std::lround(std::clamp(*r, 0.0, 1.0) * 254.0));
  });
}

std::string recall_diff_csv(const RecallDiff& diff) {
  const GridSpec& s = diff.spec;
  std::string out = spec_line("recall_diff", s, 0);
  out += "ix,iy,x_min,y_min,diff\n";
  for (int iy = 0; iy < s.ny(); ++iy) {
    for (int ix = 0; ix < s.nx(); ++ix) {
      const auto& v = diff.values[static_cast<std::size_t>(iy * s.nx() + ix)];
      if (!v) continue;
      out += std::to_string(ix) + "," + std::to_string(iy) + "," + exact(s.x_min + ix * s.cell) +
             "," + exact(s.y_min + iy * s.cell) + "," + exact(*v) + "\n";
    }
  }
  return out;
}

std::string recall_diff_pgm(const RecallDiff& diff) {
  return pgm_raster(diff.spec, [&](int c) -> unsigned {
    const auto& v = diff.values[static_cast<std::size_t>(c)];
    if (!v) return 0;
    return static_cast<unsigned>(128 + std::lround(std::clamp(*v, -1.0, 1.0) * 127.0));
  });
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace railaug
