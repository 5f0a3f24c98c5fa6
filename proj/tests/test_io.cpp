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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "railaug/error.hpp"
#include "railaug/manifest.hpp"
#include "railaug/pcd_io.hpp"
#include "railaug/report_io.hpp"
#include "support/synthetic.hpp"

using namespace railaug;

namespace {

const char* kAsciiHeader =
    "# .PCD v0.7\n"
    "VERSION 0.7\n"
    "FIELDS x y z intensity label instance\n"
    "SIZE 4 4 4 4 4 4\n"
    "TYPE F F F F I I\n"
    "COUNT 1 1 1 1 1 1\n"
    "WIDTH 3\n"
    "HEIGHT 1\n"
    "POINTS 3\n"
    "DATA ascii\n";

bool bit_equal(float a, float b) { return std::memcmp(&a, &b, sizeof(float)) == 0; }

}  // namespace

TEST_CASE("ascii frame with labels") {
  const std::string text = std::string(kAsciiHeader) +
                           "1.5 2 -1.6 0.25 4 2\n"
                           "3 4 0 1 1 7\n"
                           "10 0 0 0 0 -1\n";
  const LabeledFrame f = parse_frame(text, "fallback");
  REQUIRE(f.size() == 3);
  CHECK(f.frame_id == "fallback");
  CHECK(f.labels == std::vector<ClassId>{4, 1, 0});
  CHECK(f.instance_ids == std::vector<InstanceId>{2, 7, -1});
  CHECK(f.points[0] == Point3f{1.5f, 2.0f, -1.6f});
  CHECK(f.intensity[1] == 1.0f);
}

TEST_CASE("malformed files report a byte offset") {
  SUBCASE("too few rows") {
    std::string header = kAsciiHeader;
    header.replace(header.find("POINTS 3"), 8, "POINTS 10");
    std::string text = header;
    for (int i = 0; i < 9; ++i) text += "0 0 0 0 0 -1\n";
    CHECK_THROWS_AS(parse_frame(text), ParseError);
  }
  SUBCASE("wrong token count") {
    const std::string text = std::string(kAsciiHeader) + "1 2 3 4 5 6\n1 2 3\n1 2 3 4 5 6\n";
    try {
      parse_frame(text);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      const std::size_t second_row = std::strlen(kAsciiHeader) + std::strlen("1 2 3 4 5 6\n");
      CHECK(e.offset() == second_row);
    }
  }
  SUBCASE("truncated binary payload") {
    Rng rng(1);
    std::string bytes = serialize_frame(synth::random_frame(rng, "b", 50), PcdFormat::kBinary);
    bytes.resize(bytes.size() - 7);
    try {
      parse_frame(bytes);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.offset() == bytes.size());
    }
  }
  SUBCASE("missing DATA") {
    CHECK_THROWS_AS(parse_frame("FIELDS x y z intensity\nSIZE 4 4 4 4\nTYPE F F F F\n"),
                    ParseError);
  }
  SUBCASE("field count mismatch") {
    CHECK_THROWS_AS(parse_frame("FIELDS x y z intensity\nSIZE 4 4 4\nTYPE F F F F\nPOINTS 0\n"
                                "DATA ascii\n"),
                    ParseError);
  }
  SUBCASE("missing required field") {
    CHECK_THROWS_AS(parse_frame("FIELDS x y z\nSIZE 4 4 4\nTYPE F F F\nPOINTS 0\nDATA ascii\n"),
                    ParseError);
  }
  SUBCASE("unsupported encoding") {
    CHECK_THROWS_AS(parse_frame("FIELDS x y z intensity\nSIZE 4 4 4 4\nTYPE F F F F\nPOINTS 0\n"
                                "DATA binary_compressed\n"),
                    ParseError);
  }
  SUBCASE("garbage header line") {
    CHECK_THROWS_AS(parse_frame("HELLO world\nDATA ascii\n"), ParseError);
  }
}

TEST_CASE("missing label columns default to unlabeled") {
  const std::string text =
      "FIELDS x y z intensity\nSIZE 4 4 4 4\nTYPE F F F F\nPOINTS 2\nDATA ascii\n"
      "1 2 3 4\n5 6 7 8\n";
  const LabeledFrame f = parse_frame(text);
  CHECK(f.labels == std::vector<ClassId>{kUnlabeled, kUnlabeled});
  CHECK(f.instance_ids == std::vector<InstanceId>{kNoInstance, kNoInstance});
}

TEST_CASE("columns in any order with extra fields") {
  const std::string text =
      "FIELDS ring label x intensity y z\nSIZE 2 4 8 4 4 4\nTYPE U I F F F F\nPOINTS 1\n"
      "DATA ascii\n3 6 1.25 0.5 -2 0.75\n";
  const LabeledFrame f = parse_frame(text);
  REQUIRE(f.size() == 1);
  CHECK(f.points[0] == Point3f{1.25f, -2.0f, 0.75f});
  CHECK(f.labels[0] == 6);
  CHECK(f.intensity[0] == 0.5f);
}

TEST_CASE("binary roundtrip is bit-exact") {
  synth::TempDir dir;
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    LabeledFrame f = synth::random_frame(rng, "r" + std::to_string(trial), 1 + uniform_index(rng, 3000));
    f.sensor_id = "sensor_" + std::to_string(trial % 3);
    const auto path = dir / (f.frame_id + ".pcd");
    write_frame(f, path);
    const LabeledFrame back = read_frame(path);
    CHECK(back.frame_id == f.frame_id);
    CHECK(back.sensor_id == f.sensor_id);
    REQUIRE(back.size() == f.size());
    bool exact = true;
    for (std::size_t i = 0; i < f.size(); ++i) {
      exact = exact && bit_equal(back.points[i].x, f.points[i].x) &&
              bit_equal(back.points[i].y, f.points[i].y) &&
              bit_equal(back.points[i].z, f.points[i].z) &&
              bit_equal(back.intensity[i], f.intensity[i]);
    }
    CHECK(exact);
    CHECK(back.labels == f.labels);
    CHECK(back.instance_ids == f.instance_ids);
  }
}

TEST_CASE("ascii roundtrip keeps at least 6 significant digits") {
  Rng rng(4);
  const LabeledFrame f = synth::random_frame(rng, "a", 500);
  const LabeledFrame back = parse_frame(serialize_frame(f, PcdFormat::kAscii));
  REQUIRE(back.size() == f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(back.points[i].x == doctest::Approx(f.points[i].x).epsilon(1e-6));
    CHECK(back.intensity[i] == doctest::Approx(f.intensity[i]).epsilon(1e-6));
  }
  CHECK(back.labels == f.labels);
  // Shortest round-trip text is in fact exact.
  CHECK(back == f);
}

TEST_CASE("empty frame and header columns") {
  LabeledFrame empty;
  empty.frame_id = "nothing";
  const std::string bytes = serialize_frame(empty);
  CHECK(bytes.find("POINTS 0") != std::string::npos);
  CHECK(bytes.find("FIELDS x y z intensity label instance") != std::string::npos);
  const LabeledFrame back = parse_frame(bytes);
  CHECK(back.empty());
  CHECK(back.frame_id == "nothing");
}

TEST_CASE("unwritable path is an I/O error") {
  LabeledFrame f;
  CHECK_THROWS_AS(write_frame(f, "/nonexistent-dir/x/y.pcd"), IoError);
  CHECK_THROWS_AS(read_frame("/nonexistent-dir/x/y.pcd"), IoError);
}

TEST_CASE("writer refuses invalid frames") {
  LabeledFrame f;
  f.push_back({0, 0, 0}, 0, 1, 3);
  f.labels.push_back(2);
  CHECK_THROWS_AS(serialize_frame(f), InvalidInputError);
}

TEST_CASE("manifest json") {
  const auto j = nlohmann::json::parse(R"({
    "class_map": "classes.json",
    "frames": [
      {"id": "a", "split": "train", "path": "frames/a.pcd", "sensor": "lidar"},
      {"id": "b", "split": "val", "path": "/abs/b.pcd", "sensor": "lidar"},
      {"id": "c", "split": "train", "path": "c.pcd", "sensor": "lidar",
       "source": "a", "seed": 9, "pass": 1}
    ]})");
  const DatasetManifest m = manifest_from_json(j, "/data/set");
  REQUIRE(m.frames.size() == 3);
  CHECK(m.class_map_ref == "classes.json");
  CHECK(m.split(Split::kTrain).size() == 2);
  CHECK(m.resolve("frames/a.pcd") == std::filesystem::path("/data/set/frames/a.pcd"));
  CHECK(m.resolve("/abs/b.pcd") == std::filesystem::path("/abs/b.pcd"));
  REQUIRE(m.frames[2].provenance.has_value());
  CHECK(*m.frames[2].provenance == Provenance{"a", 9, 1});

  const DatasetManifest back = manifest_from_json(to_json(m), "/data/set");
  CHECK(back.frames == m.frames);

  auto dup = j;
  dup["frames"][1]["id"] = "a";
  CHECK_THROWS_AS(manifest_from_json(dup), InvalidInputError);
  auto bad_split = j;
  bad_split["frames"][0]["split"] = "holdout";
  CHECK_THROWS_AS(manifest_from_json(bad_split), InvalidInputError);
  CHECK_THROWS_AS(load_manifest("/nonexistent/manifest.json"), IoError);
}

TEST_CASE("manifest save and load from disk") {
  synth::TempDir dir;
  Rng rng(3);
  std::vector<LabeledFrame> frames;
  for (int i = 0; i < 4; ++i) frames.push_back(synth::random_frame(rng, synth::frame_name(i), 10));
  const auto path = synth::write_dataset(dir.path(), frames,
                                         {Split::kTrain, Split::kTrain, Split::kVal, Split::kTest});
  const DatasetManifest m = load_manifest(path);
  CHECK(m.frames.size() == 4);
  CHECK(m.split(Split::kVal).front()->id == "f0002");
  CHECK(read_frame(m.resolve(m.frames[1].path)) == frames[1]);
  CHECK(read_text(path) == to_json(m).dump(2) + "\n");
}
