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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <nlohmann/json.hpp>

#include "railaug/error.hpp"
#include "railaug/geometry.hpp"
#include "railaug/paste.hpp"
#include "railaug/pcd_io.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace railaug;

namespace {

Instance person_at(Rng& rng, double cx, double cy, std::size_t n, double z0 = 0.0) {
  Instance inst;
  inst.class_id = cls::kPerson;
  inst.source_frame = "donor";
  for (std::size_t i = 0; i < n; ++i) {
    inst.points.push_back({cx + uniform_real(rng, -0.3, 0.3), cy + uniform_real(rng, -0.3, 0.3),
                           z0 + uniform_real(rng, 0.0, 1.8)});
    inst.intensity.push_back(static_cast<float>(i));
  }
  return inst;
}

RegistryEntry entry(Instance inst) {
  const double d = planar_distance(centroid(inst));
  return {std::move(inst), d};
}

// One populated bin per (lo, N, ref) triple, 20 m wide from 0.
DensityProfile profile_of(std::size_t n_bins, std::vector<std::tuple<std::size_t, double, double>> pop) {
  std::vector<DensityBin> bins(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    bins[b].lo = 20.0 * static_cast<double>(b);
    bins[b].hi = 20.0 * static_cast<double>(b + 1);
  }
  for (auto [b, n, ref] : pop) {
    bins[b].populated = true;
    bins[b].expected_points = n;
    bins[b].ref_distance = ref;
    bins[b].instances = 1;
  }
  return DensityProfile(bins);
}

double min_z(const Instance& inst) {
  double m = inst.points.front().z;
  for (const auto& p : inst.points) m = std::min(m, p.z);
  return m;
}

}  // namespace

TEST_CASE("registry keeps instances above the point threshold") {
  Rng rng(1);
  LabeledFrame a;
  a.frame_id = "a";
  synth::add_person(a, rng, 0, 10, 0, 30, -1.6f);
  synth::add_person(a, rng, 1, 20, 1, 30, -1.6f);
  synth::add_person(a, rng, 2, 30, -1, 30, -1.6f);
  LabeledFrame b;
  b.frame_id = "b";
  synth::add_ground(b, 0, 5, 0, 5, 1, -1.6f);
  LabeledFrame c;
  c.frame_id = "c";
  synth::add_person(c, rng, 5, 12, 0, 2, -1.6f);
  synth::add_person(c, rng, 6, 14, 0, 9, -1.6f);

  const auto reg = build_registry(std::vector<LabeledFrame>{a, b, c});
  CHECK(reg.size() == 4);
  CHECK(reg.donor_frames() == std::vector<std::string>{"a", "c"});
  CHECK(reg.donor_entries(0).size() == 3);
  CHECK(reg.donor_entries(1).size() == 1);
  for (const auto& e : reg.entries()) {
    CHECK(e.instance.class_id == cls::kPerson);
    CHECK(e.instance.size() >= 5);
  }
  CHECK_THROWS_AS(build_registry(std::vector<LabeledFrame>{b}), InvalidInputError);
}

TEST_CASE("registry size matches a hand count over a synthetic split") {
  Rng rng(2);
  std::vector<LabeledFrame> frames;
  std::size_t expected = 0;
  InstanceId id = 0;
  for (int f = 0; f < 10; ++f) {
    LabeledFrame fr;
    fr.frame_id = synth::frame_name(f);
    for (int k = 0; k < 4; ++k) {
      const std::size_t n = 1 + uniform_index(rng, 12);
      synth::add_person(fr, rng, id++, 5 + 3 * k, 0, n, -1.6f);
      expected += n >= 5 ? 1 : 0;
    }
    frames.push_back(fr);
  }
  CHECK(build_registry(frames).size() == expected);
}

TEST_CASE("registry save and load") {
  Rng rng(3);
  std::vector<RegistryEntry> entries;
  for (int i = 0; i < 5; ++i) {
    Instance inst = person_at(rng, 10 + i, 0, 20 + i);
    inst.source_frame = i < 3 ? "x" : "y";
    inst.source_instance_id = i;
    for (auto& p : inst.points) p = to_double(to_float(p));
    entries.push_back(entry(std::move(inst)));
  }
  const InstanceRegistry reg(entries, 5);
  synth::TempDir dir;
  save_registry(reg, dir / "r.pcd", dir / "r.json");
  const InstanceRegistry back = load_registry(dir / "r.pcd", dir / "r.json");
  REQUIRE(back.size() == reg.size());
  CHECK(back.donor_frames() == reg.donor_frames());
  for (std::size_t i = 0; i < reg.size(); ++i) {
    CHECK(back.entries()[i].instance.points == reg.entries()[i].instance.points);
    CHECK(back.entries()[i].instance.source_instance_id == static_cast<InstanceId>(i));
    CHECK(back.entries()[i].centroid_distance == reg.entries()[i].centroid_distance);
  }
}

TEST_CASE("density profile: median and inverse-square fill") {
  Rng rng(4);
  std::vector<RegistryEntry> entries;
  for (std::size_t n : {100, 120, 80}) entries.push_back(entry(person_at(rng, 10, 0, n)));
  const InstanceRegistry reg(entries, 5);
  const DensityProfile prof = build_density_profile(reg, 20.0, 100.0);
  REQUIRE(prof.bins().size() == 5);
  CHECK(prof.bins()[0].populated);
  CHECK(prof.bins()[0].expected_points == 100.0);
  CHECK(prof.expected_points(5.0) == 100.0);
  for (std::size_t b = 1; b < 5; ++b) CHECK_FALSE(prof.bins()[b].populated);
  const double ref = prof.bins()[0].ref_distance;
  CHECK(prof.expected_points(50.0) == doctest::Approx(100.0 * (ref / 50.0) * (ref / 50.0)));

  const DensityProfile single = profile_of(5, {{1, 100.0, 20.0}});
  CHECK(single.expected_points(40.0) == doctest::Approx(25.0));
  CHECK(single.expected_points(25.0) == 100.0);

  // Equidistant populated bins: the lower one is the reference.
  const DensityProfile two = profile_of(5, {{0, 400.0, 10.0}, {2, 50.0, 50.0}});
  CHECK(two.expected_points(30.0) == doctest::Approx(400.0 * (10.0 / 30.0) * (10.0 / 30.0)));

  const DensityProfile back = density_profile_from_json(nlohmann::json::parse(to_json(prof).dump()));
  CHECK(back.bins().size() == prof.bins().size());
  CHECK(back.expected_points(50.0) == prof.expected_points(50.0));
}

TEST_CASE("density profile extends to the farthest instance") {
  Rng rng(5);
  std::vector<RegistryEntry> entries{entry(person_at(rng, 10, 0, 50)),
                                     entry(person_at(rng, 130, 0, 8))};
  const DensityProfile prof = build_density_profile(InstanceRegistry(entries, 5), 20.0, 100.0);
  CHECK(prof.bins().size() == 7);
  CHECK(prof.bins().back().populated);
}

TEST_CASE("flip mirrors x offsets about the centroid") {
  Instance sym;
  sym.points = {{11, 0, 0}, {9, 0, 0}};
  sym.intensity = {0, 0};
  const Instance f = mirror_about_centroid(sym, MirrorAxis::kX);
  CHECK(std::multiset<double>{f.points[0].x, f.points[1].x} == std::multiset<double>{9, 11});

  Instance one;
  one.points = {{10, 5, 1}, {12, 6, 2}, {8, 4, 0}};
  one.intensity = {0, 0, 0};
  const Point3d c = centroid(one);
  const Instance m = mirror_about_centroid(one, MirrorAxis::kX);
  CHECK(m.points[1].x == doctest::Approx(c.x - 2.0));
  CHECK(m.points[1].y == 6.0);
  CHECK(m.points[1].z == 2.0);
  const Point3d mc = centroid(m);
  CHECK(mc.x == doctest::Approx(c.x));

  const Instance my = mirror_about_centroid(one, MirrorAxis::kY);
  CHECK(my.points[1].x == 12.0);
  CHECK(my.points[1].y == doctest::Approx(c.y - 1.0));

  Rng rng(6);
  const Instance r = person_at(rng, 20, 3, 60);
  PasteParams always;
  always.flip_probability = 1.0;
  CHECK(oracle::max_pairwise_change(r.points, flip_instance(r, rng, always).points) < 1e-9);
  PasteParams never;
  never.flip_probability = 0.0;
  CHECK(flip_instance(r, rng, never).points == r.points);
}

TEST_CASE("rotation about the centroid") {
  Instance inst;
  inst.points = {{11, 0, 0.5}, {9, 0, 0.5}};
  inst.intensity = {0, 0};
  const Instance q = rotate_about_centroid(inst, std::numbers::pi / 2);
  CHECK(q.points[0].x == doctest::Approx(10.0));
  CHECK(q.points[0].y == doctest::Approx(1.0));
  CHECK(q.points[0].z == 0.5);
  CHECK(rotate_about_centroid(inst, 0.0).points == inst.points);

  Rng rng(7);
  for (int t = 0; t < 50; ++t) {
    const Instance r = person_at(rng, uniform_real(rng, 2, 90), uniform_real(rng, -10, 10), 40);
    const Instance o = rotate_instance(r, rng);
    CHECK(oracle::max_pairwise_change(r.points, o.points) < 1e-6);
    const Point3d a = centroid(r), b = centroid(o);
    CHECK(std::abs(a.x - b.x) < 1e-9);
    CHECK(std::abs(a.y - b.y) < 1e-9);
    for (std::size_t i = 0; i < r.size(); ++i) CHECK(o.points[i].z == r.points[i].z);
  }
}

TEST_CASE("y shift stays within its range") {
  Instance inst;
  inst.points = {{10, -1, 0}, {10, 1, 0}};
  inst.intensity = {0, 0};
  PasteParams p;
  p.y_shift_min = p.y_shift_max = 2.0;
  Rng rng(8);
  CHECK(centroid(shift_y(inst, rng, p)).y == doctest::Approx(2.0));

  PasteParams d;
  Instance origin;
  origin.points = {{0, 0, 0}};
  origin.intensity = {0};
  double lo = 1e9, hi = -1e9;
  for (int i = 0; i < 100000; ++i) {
    const double y = shift_y(origin, rng, d).points[0].y;
    lo = std::min(lo, y);
    hi = std::max(hi, y);
  }
  CHECK(lo >= -2.0);
  CHECK(hi <= 2.0);
  CHECK(lo < -1.99);
  CHECK(hi > 1.99);
}

TEST_CASE("target count range") {
  auto r = target_count_range(120.0);
  CHECK(r.lo == 108);
  CHECK(r.hi == 132);
  r = target_count_range(100.0);
  CHECK(r.lo == 90);
  CHECK(r.hi == 110);
  r = target_count_range(0.3);
  CHECK(r.lo == 1);
  CHECK(r.hi == 1);
}

TEST_CASE("x shift with downsampling") {
  Rng rng(9);
  const DensityProfile prof = profile_of(5, {{0, 120.0, 10.0}, {1, 120.0, 30.0},
                                            {2, 120.0, 50.0}, {3, 120.0, 70.0},
                                            {4, 120.0, 90.0}});
  SUBCASE("large donor lands in [108, 132]") {
    for (int t = 0; t < 100; ++t) {
      const Instance big = person_at(rng, 8, 1, 500);
      const Instance out = shift_x_with_downsample(big, prof, rng);
      CHECK(out.size() >= 108);
      CHECK(out.size() <= 132);
    }
  }
  SUBCASE("small donor is never upsampled") {
    const Instance small = person_at(rng, 8, 1, 50);
    const Instance out = shift_x_with_downsample(small, prof, rng);
    CHECK(out.size() == 50);
  }
  SUBCASE("target equal to the current distance does not move") {
    const Instance big = person_at(rng, 15, 2, 300);
    const double d0 = planar_distance(centroid(big));
    const Instance out = shift_x_to_distance(big, d0, prof, rng);
    std::set<std::tuple<double, double, double>> src;
    for (const auto& p : big.points) src.insert({p.x, p.y, p.z});
    for (const auto& p : out.points) CHECK(src.count({p.x, p.y, p.z}) == 1);
  }
  SUBCASE("centroid reaches the target distance along +x") {
    const Instance inst = person_at(rng, 12, 3, 80);
    const Instance out = shift_x_to_distance(inst, 55.0, profile_of(5, {{0, 1e9, 10.0}}), rng);
    REQUIRE(out.size() == 80);
    const Point3d a = centroid(inst), b = centroid(out);
    CHECK(planar_distance(b) == doctest::Approx(55.0).epsilon(1e-12));
    CHECK(b.y == doctest::Approx(a.y));
    CHECK(b.x > a.x);
    CHECK(oracle::max_pairwise_change(inst.points, out.points) < 1e-6);
  }
  SUBCASE("sampled targets never fall below the current distance") {
    for (int t = 0; t < 2000; ++t) {
      const double cur = uniform_real(rng, 0, 99);
      const double d = sample_target_distance(cur, prof, rng);
      CHECK(d >= cur);
      CHECK(d < 100.0);
    }
    CHECK(sample_target_distance(150.0, prof, rng) == 150.0);
  }
}

TEST_CASE("sparse bins are targeted more often") {
  std::vector<DensityBin> bins(5);
  const std::size_t counts[5] = {99, 49, 9, 4, 0};
  for (std::size_t b = 0; b < 5; ++b) {
    bins[b].lo = 20.0 * b;
    bins[b].hi = 20.0 * (b + 1);
    bins[b].instances = counts[b];
    bins[b].expected_points = 10;
    bins[b].ref_distance = bins[b].lo + 10;
    bins[b].populated = true;
  }
  const DensityProfile prof(bins);
  Rng rng(10);
  std::vector<double> hits(5, 0);
  const int n = 200000;
  for (int i = 0; i < n; ++i) ++hits[static_cast<std::size_t>(sample_target_distance(0.0, prof, rng) / 20.0)];
  double total_w = 0;
  for (auto c : counts) total_w += 1.0 / (c + 1.0);
  for (std::size_t b = 0; b < 5; ++b) {
    CHECK(hits[b] / n == doctest::Approx((1.0 / (counts[b] + 1.0)) / total_w).epsilon(0.03));
  }
}

TEST_CASE("ground estimate") {
  PasteParams p;
  SUBCASE("mean under the box") {
    LabeledFrame s;
    for (float z : {-1.6f, -1.6f, -1.7f, -1.5f}) s.push_back({10, 0, z}, 0, 0, -1);
    s.push_back({30, 0, 5.0f}, 0, 0, -1);
    const auto g = estimate_ground_height(s, Aabb2D{9, 11, -1, 1}, p);
    REQUIRE(g.has_value());
    CHECK(*g == doctest::Approx(-1.6).epsilon(1e-6));
  }
  SUBCASE("track fallback when the box is empty") {
    LabeledFrame s;
    for (int i = 0; i < 8; ++i) s.push_back({10.0f + i, 3, -1.61f}, 0, cls::kTrack, 0);
    for (int i = 0; i < 8; ++i) s.push_back({10.0f + i, -3, -1.63f}, 0, cls::kTrack, 1);
    const auto g = estimate_ground_height(s, Aabb2D{12, 13, -0.5, 0.5}, p);
    REQUIRE(g.has_value());
    CHECK(*g == doctest::Approx(-1.62).epsilon(1e-5));
  }
  SUBCASE("fallback uses only the nearest track points") {
    LabeledFrame s;
    for (int i = 0; i < 16; ++i) s.push_back({20.0f + 0.1f * i, 1, -1.6f}, 0, cls::kTrack, 0);
    for (int i = 0; i < 16; ++i) s.push_back({27.0f + 0.1f * i, 1, -1.0f}, 0, cls::kTrack, 1);
    const auto g = estimate_ground_height(s, Aabb2D{20, 21, -0.2, 0.2}, p);
    REQUIRE(g.has_value());
    CHECK(*g == doctest::Approx(-1.6).epsilon(1e-6));
  }
  SUBCASE("nothing nearby") {
    LabeledFrame s;
    s.push_back({80, 0, -1.6f}, 0, cls::kTrack, 0);
    CHECK_FALSE(estimate_ground_height(s, Aabb2D{10, 11, 0, 1}, p).has_value());
  }
  SUBCASE("unrealistic height is rejected") {
    LabeledFrame s;
    for (int i = 0; i < 10; ++i) s.push_back({10.0f + i, 3, -1.6f}, 0, cls::kTrack, 0);
    s.push_back({12, 0, 0.4f}, 0, cls::kTrain, 2);
    CHECK_FALSE(estimate_ground_height(s, Aabb2D{11.5, 12.5, -0.5, 0.5}, p).has_value());
    s.points.back().z = -0.2f;
    CHECK(estimate_ground_height(s, Aabb2D{11.5, 12.5, -0.5, 0.5}, p).has_value());
  }
}

TEST_CASE("shift z to ground") {
  Instance inst;
  inst.points = {{0, 0, 0.3}, {0, 0, 2.0}};
  inst.intensity = {0, 0};
  const Instance g = shift_z_to_ground(inst, -1.2);
  CHECK(min_z(g) == doctest::Approx(-1.2));
  CHECK(g.points[1].z - g.points[0].z == doctest::Approx(1.7));
  CHECK(shift_z_to_ground(g, -1.2).points == g.points);
}

TEST_CASE("paste bookkeeping") {
  Rng gen(11);
  LabeledFrame scan;
  scan.frame_id = "target";
  synth::add_ground(scan, 0, 100, -6, 6, 0.5, -1.6f);
  synth::add_track(scan, gen, 3, 0.75, 3, 100, 400);

  Instance donor = person_at(gen, 5, 0, 80, -1.6);
  donor.source_frame = "donor";
  const InstanceRegistry reg({entry(donor)}, 5);
  const DensityProfile prof = profile_of(5, {{0, 1e9, 10.0}});
  PasteParams p;

  Rng rng(12);
  const PasteResult r = paste_instances_detailed(scan, reg, prof, p, rng);
  REQUIRE(r.pasted_instances == 1);
  CHECK(r.donor_frame == "donor");
  CHECK(r.frame.size() == scan.size() + 80);
  std::set<InstanceId> ids;
  std::size_t persons = 0;
  for (std::size_t i = scan.size(); i < r.frame.size(); ++i) {
    CHECK(r.frame.labels[i] == cls::kPerson);
    ids.insert(r.frame.instance_ids[i]);
    ++persons;
  }
  CHECK(persons == 80);
  CHECK(ids == std::set<InstanceId>{4});
  for (std::size_t i = 0; i < scan.size(); ++i) {
    CHECK(r.frame.points[i] == scan.points[i]);
    CHECK(r.frame.labels[i] == scan.labels[i]);
  }
  CHECK_NOTHROW(validate_frame(r.frame));

  Rng a(77), b(77);
  CHECK(serialize_frame(paste_instances(scan, reg, prof, p, a)) ==
        serialize_frame(paste_instances(scan, reg, prof, p, b)));
}

TEST_CASE("paste: size accounting and skipped instances") {
  Rng gen(13);
  std::vector<RegistryEntry> entries;
  for (int i = 0; i < 6; ++i) {
    Instance inst = person_at(gen, 6 + i, 0, 40 + 10 * i, -1.6);
    inst.source_frame = i < 4 ? "d1" : "d2";
    entries.push_back(entry(std::move(inst)));
  }
  const InstanceRegistry reg(entries, 5);
  const DensityProfile prof = build_density_profile(reg);

  LabeledFrame scan;
  scan.frame_id = "s";
  synth::add_ground(scan, 0, 100, -6, 6, 0.5, -1.6f);
  synth::add_track(scan, gen, 0, 0.75, 3, 100, 400);
  PasteParams p;
  for (int t = 0; t < 20; ++t) {
    Rng rng(100 + t);
    const PasteResult r = paste_instances_detailed(scan, reg, prof, p, rng);
    CHECK(r.frame.size() == scan.size() + r.pasted_points);
    CHECK(r.pasted_instances + r.skipped_instances ==
          (r.donor_frame == "d1" ? 4u : 2u));
  }

  // A scan with no ground and no track skips everything.
  LabeledFrame bare;
  bare.frame_id = "bare";
  bare.push_back({500, 500, 0}, 0, 0, -1);
  Rng rng(5);
  const PasteResult none = paste_instances_detailed(bare, reg, prof, p, rng);
  CHECK(none.pasted_instances == 0);
  CHECK(none.frame == bare);

  PasteParams capped;
  capped.max_instances = 1;
  Rng rc(6);
  CHECK(paste_instances_detailed(scan, reg, prof, capped, rc).pasted_instances <= 1);
}
