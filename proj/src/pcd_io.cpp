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

#include "railaug/pcd_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string_view>
#include <vector>

#include "railaug/error.hpp"

namespace railaug {
namespace {

struct FieldLayout {
  std::string name;
  int size = 4;
  char type = 'F';
  int count = 1;
  std::size_t offset = 0;  // byte offset within a binary point record
};

struct Header {
  std::vector<FieldLayout> fields;
  std::size_t points = 0;
  bool binary = false;
  std::size_t stride = 0;
  std::size_t data_offset = 0;
  std::string frame_id;
  std::string sensor_id;
};

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view token, std::uint64_t offset, const char* what) {
  T value{};
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw ParseError(std::string("invalid ") + what + " '" + std::string(token) + "'",
                     offset);
  }
  return value;
}

std::string rest_after(std::string_view line, std::string_view prefix) {
  std::string_view rest = line.substr(prefix.size());
  while (!rest.empty() && (rest.back() == '\r' || rest.back() == ' ')) rest.remove_suffix(1);
  return std::string(rest);
}

Header parse_header(std::string_view bytes) {
  Header h;
  std::vector<std::string_view> names, sizes, types, counts;
  std::optional<std::size_t> points, width, height;
  std::size_t pos = 0;
  bool have_data = false;
  while (pos < bytes.size()) {
    const std::size_t line_start = pos;
    std::size_t eol = bytes.find('\n', pos);
    const bool last = eol == std::string_view::npos;
    std::string_view line = bytes.substr(pos, last ? bytes.size() - pos : eol - pos);
    pos = last ? bytes.size() : eol + 1;
    if (line.empty() || line.front() == '#') {
      if (line.starts_with("# frame ")) h.frame_id = rest_after(line, "# frame ");
      if (line.starts_with("# sensor ")) h.sensor_id = rest_after(line, "# sensor ");
      continue;
    }
    auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    const std::string_view key = tokens.front();
    std::vector<std::string_view> args(tokens.begin() + 1, tokens.end());
    if (key == "VERSION" || key == "VIEWPOINT") {
      continue;
    } else if (key == "FIELDS") {
      names = args;
    } else if (key == "SIZE") {
      sizes = args;
    } else if (key == "TYPE") {
      types = args;
    } else if (key == "COUNT") {
      counts = args;
    } else if (key == "WIDTH" && args.size() == 1) {
      width = parse_number<std::size_t>(args[0], line_start, "WIDTH");
    } else if (key == "HEIGHT" && args.size() == 1) {
      height = parse_number<std::size_t>(args[0], line_start, "HEIGHT");
    } else if (key == "POINTS" && args.size() == 1) {
      points = parse_number<std::size_t>(args[0], line_start, "POINTS");
    } else if (key == "DATA" && args.size() == 1) {
      if (args[0] == "ascii") {
        h.binary = false;
      } else if (args[0] == "binary") {
        h.binary = true;
      } else {
        throw ParseError("unsupported DATA encoding '" + std::string(args[0]) + "'",
                         line_start);
      }
      h.data_offset = pos;
      have_data = true;
      break;
    } else {
      throw ParseError("unexpected header line '" + std::string(line) + "'", line_start);
    }
  }
  if (!have_data) throw ParseError("header has no DATA line", bytes.size());
  if (names.empty()) throw ParseError("header has no FIELDS", h.data_offset);
  if (sizes.size() != names.size() || types.size() != names.size() ||
      (!counts.empty() && counts.size() != names.size())) {
    throw ParseError("FIELDS/SIZE/TYPE/COUNT lengths differ", h.data_offset);
  }
  std::size_t offset = 0;
  for (std::size_t i = 0; i < names.size(); ++i) {
    FieldLayout f;
    f.name = std::string(names[i]);
    f.size = parse_number<int>(sizes[i], h.data_offset, "SIZE");
    if (types[i].size() != 1) throw ParseError("invalid TYPE", h.data_offset);
    f.type = types[i][0];
    f.count = counts.empty() ? 1 : parse_number<int>(counts[i], h.data_offset, "COUNT");
    const bool ok_type = (f.type == 'F' && (f.size == 4 || f.size == 8)) ||
                         ((f.type == 'I' || f.type == 'U') &&
                          (f.size == 1 || f.size == 2 || f.size == 4 || f.size == 8));
    if (!ok_type || f.count < 1) {
      throw ParseError("unsupported field '" + f.name + "'", h.data_offset);
    }
    f.offset = offset;
    offset += static_cast<std::size_t>(f.size) * static_cast<std::size_t>(f.count);
    h.fields.push_back(std::move(f));
  }
  h.stride = offset;
  if (points) {
    h.points = *points;
  } else if (width) {
    h.points = *width * height.value_or(1);
  } else {
    throw ParseError("header has neither POINTS nor WIDTH", h.data_offset);
  }
  return h;
}

template <typename T>
T load_le(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
    auto* b = reinterpret_cast<unsigned char*>(&v);
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
  }
  return v;
}

double load_binary_scalar(const FieldLayout& f, const char* p) {
  switch (f.type) {
    case 'F':
      return f.size == 4 ? static_cast<double>(load_le<float>(p)) : load_le<double>(p);
    case 'I':
      switch (f.size) {
        case 1: return load_le<std::int8_t>(p);
        case 2: return load_le<std::int16_t>(p);
        case 4: return load_le<std::int32_t>(p);
        default: return static_cast<double>(load_le<std::int64_t>(p));
      }
    default:
      switch (f.size) {
        case 1: return load_le<std::uint8_t>(p);
        case 2: return load_le<std::uint16_t>(p);
        case 4: return load_le<std::uint32_t>(p);
        default: return static_cast<double>(load_le<std::uint64_t>(p));
      }
  }
}

struct Columns {
  int x = -1, y = -1, z = -1, intensity = -1, label = -1, instance = -1;
};

Columns locate(const Header& h) {
  Columns c;
  for (std::size_t i = 0; i < h.fields.size(); ++i) {
    const auto& n = h.fields[i].name;
    const int idx = static_cast<int>(i);
    if (n == "x") c.x = idx;
    else if (n == "y") c.y = idx;
    else if (n == "z") c.z = idx;
    else if (n == "intensity") c.intensity = idx;
    else if (n == "label") c.label = idx;
    else if (n == "instance") c.instance = idx;
  }
  if (c.x < 0 || c.y < 0 || c.z < 0 || c.intensity < 0) {
    throw ParseError("FIELDS must include x y z intensity", h.data_offset);
  }
  for (int idx : {c.x, c.y, c.z, c.intensity, c.label, c.instance}) {
    if (idx >= 0 && h.fields[idx].count != 1) {
      throw ParseError("field '" + h.fields[idx].name + "' must have COUNT 1",
                       h.data_offset);
    }
  }
  return c;
}

void read_binary(std::string_view bytes, const Header& h, const Columns& c,
                 LabeledFrame& frame) {
  const std::size_t need = h.points * h.stride;
  const std::size_t have = bytes.size() - h.data_offset;
  if (have < need) {
    throw ParseError("truncated binary payload: need " + std::to_string(need) +
                         " bytes, found " + std::to_string(have),
                     bytes.size());
  }
  const char* base = bytes.data() + h.data_offset;
  auto f32 = [&](int col, const char* rec) -> float {
    const auto& f = h.fields[col];
    if (f.type == 'F' && f.size == 4) return load_le<float>(rec + f.offset);
    return static_cast<float>(load_binary_scalar(f, rec + f.offset));
  };
  auto i32 = [&](int col, const char* rec) -> std::int32_t {
    const auto& f = h.fields[col];
    if (f.type == 'I' && f.size == 4) return load_le<std::int32_t>(rec + f.offset);
    return static_cast<std::int32_t>(load_binary_scalar(f, rec + f.offset));
  };
  for (std::size_t i = 0; i < h.points; ++i) {
    const char* rec = base + i * h.stride;
    frame.push_back({f32(c.x, rec), f32(c.y, rec), f32(c.z, rec)}, f32(c.intensity, rec),
                    c.label >= 0 ? i32(c.label, rec) : kUnlabeled,
                    c.instance >= 0 ? i32(c.instance, rec) : kNoInstance);
  }
}

void read_ascii(std::string_view bytes, const Header& h, const Columns& c,
                LabeledFrame& frame) {
  std::size_t expected_tokens = 0;
  std::vector<std::size_t> first_token(h.fields.size());
  for (std::size_t i = 0; i < h.fields.size(); ++i) {
    first_token[i] = expected_tokens;
    expected_tokens += static_cast<std::size_t>(h.fields[i].count);
  }
  std::size_t pos = h.data_offset;
  std::size_t rows = 0;
  while (pos < bytes.size()) {
    const std::size_t line_start = pos;
    std::size_t eol = bytes.find('\n', pos);
    if (eol == std::string_view::npos) eol = bytes.size();
    std::string_view line = bytes.substr(pos, eol - pos);
    pos = eol + 1;
    auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (rows == h.points) {
      throw ParseError("more data rows than the " + std::to_string(h.points) +
                           " points declared",
                       line_start);
    }
    if (tokens.size() != expected_tokens) {
      throw ParseError("row has " + std::to_string(tokens.size()) + " values, expected " +
                           std::to_string(expected_tokens),
                       line_start);
    }
    auto f32 = [&](int col) {
      return parse_number<float>(tokens[first_token[col]], line_start, "float");
    };
    auto i32 = [&](int col) -> std::int32_t {
      const auto& f = h.fields[col];
      if (f.type == 'F') {
        return static_cast<std::int32_t>(
            parse_number<double>(tokens[first_token[col]], line_start, "number"));
      }
      return parse_number<std::int32_t>(tokens[first_token[col]], line_start, "integer");
    };
    frame.push_back({f32(c.x), f32(c.y), f32(c.z)}, f32(c.intensity),
                    c.label >= 0 ? i32(c.label) : kUnlabeled,
                    c.instance >= 0 ? i32(c.instance) : kNoInstance);
    ++rows;
  }
  if (rows != h.points) {
    throw ParseError("header declares " + std::to_string(h.points) +
                         " points but data has " + std::to_string(rows) + " rows",
                     bytes.size());
  }
}

template <typename T>
void append_le(std::string& out, T v) {
  if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
    auto* b = reinterpret_cast<unsigned char*>(&v);
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
  }
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
void append_text(std::string& out, T v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), ptr);
}

}  // namespace

LabeledFrame parse_frame(std::string_view bytes, const std::string& fallback_id) {
  const Header h = parse_header(bytes);
  const Columns c = locate(h);
  LabeledFrame frame;
  frame.frame_id = h.frame_id.empty() ? fallback_id : h.frame_id;
  frame.sensor_id = h.sensor_id;
  frame.reserve(h.points);
  if (h.binary) {
    read_binary(bytes, h, c, frame);
  } else {
    read_ascii(bytes, h, c, frame);
  }
  return frame;
}

LabeledFrame read_frame(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse_frame(bytes, path.stem().string());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.offset());
  }
}

std::string serialize_frame(const LabeledFrame& frame, PcdFormat format) {
  validate_frame(frame, 1 << 30);
  const std::size_t n = frame.size();
  std::string out;
  out.reserve(256 + n * (format == PcdFormat::kBinary ? 24 : 64));
  out += "# .PCD v0.7 - Point Cloud Data file format\n";
  if (!frame.frame_id.empty()) out += "# frame " + frame.frame_id + "\n";
  if (!frame.sensor_id.empty()) out += "# sensor " + frame.sensor_id + "\n";
  out += "VERSION 0.7\n";
  out += "FIELDS x y z intensity label instance\n";
  out += "SIZE 4 4 4 4 4 4\n";
  out += "TYPE F F F F I I\n";
  out += "COUNT 1 1 1 1 1 1\n";
  out += "WIDTH " + std::to_string(n) + "\n";
  out += "HEIGHT 1\n";
  out += "VIEWPOINT 0 0 0 1 0 0 0\n";
  out += "POINTS " + std::to_string(n) + "\n";
  if (format == PcdFormat::kBinary) {
    out += "DATA binary\n";
    for (std::size_t i = 0; i < n; ++i) {
      append_le(out, frame.points[i].x);
      append_le(out, frame.points[i].y);
      append_le(out, frame.points[i].z);
      append_le(out, frame.intensity[i]);
      append_le(out, frame.labels[i]);
      append_le(out, frame.instance_ids[i]);
    }
  } else {
    out += "DATA ascii\n";
    for (std::size_t i = 0; i < n; ++i) {
      append_text(out, frame.points[i].x);
      out += ' ';
      append_text(out, frame.points[i].y);
      out += ' ';
      append_text(out, frame.points[i].z);
      out += ' ';
      append_text(out, frame.intensity[i]);
      out += ' ';
      append_text(out, frame.labels[i]);
      out += ' ';
      append_text(out, frame.instance_ids[i]);
      out += '\n';
    }
  }
  return out;
}

void write_frame(const LabeledFrame& frame, const std::filesystem::path& path,
                 PcdFormat format) {
  const std::string bytes = serialize_frame(frame, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace railaug
