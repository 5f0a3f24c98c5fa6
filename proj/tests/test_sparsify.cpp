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

#include "railaug/error.hpp"
#include "railaug/geometry.hpp"
#include "railaug/pcd_io.hpp"
#include "railaug/sparsify.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace railaug;

namespace {

Instance on_axis(const std::vector<double>& distances) {
  Instance inst;
  inst.class_id = cls::kTrack;
  for (double d : distances) {
    inst.points.push_back({d, 0.0, -1.5});
    inst.intensity.push_back(0.0f);
  }
  return inst;
}

std::vector<double> distances(const Instance& inst) {
  std::vector<double> d;
  for (const auto& p : inst.points) d.push_back(std::sqrt(p.x * p.x + p.y * p.y));
  return d;
}

// n points spread evenly inside [lo, hi).
void fill(std::vector<double>& out, double lo, double hi, int n) {
  for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * (i + 0.5) / n);
}

}  // namespace

TEST_CASE("window_count is half-open") {
  const Instance inst = on_axis({69.9, 70.0, 79.9, 80.0});
  CHECK(window_count(inst, 70.0, 80.0) == 2);
  CHECK(window_count(Instance{}, 0.0, 10.0) == 0);

  Rng rng(8);
  std::vector<double> d;
  Instance r;
  for (int i = 0; i < 1000; ++i) {
    const double x = uniform_real(rng, 0, 100), y = uniform_real(rng, -5, 5);
    r.points.push_back({x, y, 0});
    r.intensity.push_back(0);
  }
  const auto rd = distances(r);
  for (int k = 0; k < 50; ++k) {
    const double lo = uniform_real(rng, 0, 90);
    const double hi = lo + uniform_real(rng, 0.1, 20);
    CHECK(window_count(r, lo, hi) == oracle::in_window(rd, lo, hi));
  }
}

TEST_CASE("equalizes near windows to the defining window") {
  std::vector<double> d;
  for (int w = 0; w < 7; ++w) fill(d, w * 10.0, w * 10.0 + 10.0, 100);
  fill(d, 70.0, 80.0, 8);
  fill(d, 80.0, 95.0, 5);
  const Instance inst = on_axis(d);

  SparsifyParams p;
  p.d_max = 80;
  p.window = 10;
  Rng rng(1);
  const Instance out = sparsify_instance(inst, p, rng);
  const auto od = distances(out);
  for (int w = 0; w < 7; ++w) CHECK(oracle::in_window(od, w * 10.0, w * 10.0 + 10.0) == 8);
  CHECK(oracle::in_window(od, 70, 80) == 8);
  CHECK(oracle::in_window(od, 80, 1e9) == 5);
  CHECK(out.size() == 69);
}

TEST_CASE("identity when no window exceeds the cap") {
  std::vector<double> d;
  for (int w = 0; w < 8; ++w) fill(d, w * 10.0, w * 10.0 + 10.0, 5);
  const Instance inst = on_axis(d);
  SparsifyParams p;
  Rng rng(2);
  const Instance out = sparsify_instance(inst, p, rng);
  CHECK(out.points == inst.points);
}

TEST_CASE("short track clamps d_max to its farthest point") {
  std::vector<double> d;
  fill(d, 0, 35, 300);
  fill(d, 35, 45, 12);
  const auto w = resolve_window(d, SparsifyParams{});
  CHECK(w.d_eff == doctest::Approx(d.back()));
  CHECK(w.d_eff < 45.0);
  CHECK(w.c_max == oracle::in_window(d, w.d_eff - 10.0, w.d_eff));

  Rng rng(3);
  const auto keep = sparsify_keep_mask(d, SparsifyParams{}, rng);
  std::vector<double> kept;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (keep[i]) kept.push_back(d[i]);
  }
  for (double hi = w.d_eff - 10.0; hi > 0; hi -= 10.0) {
    CHECK(oracle::in_window(kept, std::max(hi - 10.0, 0.0), hi) <= w.c_max);
  }
}

TEST_CASE("last partial window is clipped at zero and capped") {
  // d_eff = 75, W = 10: windows down to [0, 5).
  std::vector<double> d;
  fill(d, 0, 5, 40);
  fill(d, 5, 65, 600);
  fill(d, 65, 75, 9);
  fill(d, 75, 80, 2);
  SparsifyParams p;
  p.d_max = 75;
  Rng rng(4);
  const auto kept_mask = sparsify_keep_mask(d, p, rng);
  std::vector<double> kept;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (kept_mask[i]) kept.push_back(d[i]);
  }
  CHECK(oracle::in_window(kept, 0, 5) == 9);
  CHECK(oracle::in_window(kept, 65, 75) == 9);
}

TEST_CASE("empty defining window empties closer windows") {
  std::vector<double> d;
  fill(d, 0, 50, 100);
  fill(d, 85, 90, 3);  // beyond d_max, so d_eff = 80 and [70, 80) is empty
  SparsifyParams p;
  Rng rng(5);
  const auto keep = sparsify_keep_mask(d, p, rng);
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(keep[i] == (d[i] >= 80.0));
}

TEST_CASE("empty instance is a no-op") {
  Rng rng(6);
  CHECK(sparsify_instance(Instance{}, SparsifyParams{}, rng).empty());
}

TEST_CASE("parameter validation") {
  SparsifyParams p;
  p.window = 0;
  CHECK_THROWS_AS(p.validate(), InvalidInputError);
  p = {};
  p.d_max = -1;
  CHECK_THROWS_AS(p.validate(), InvalidInputError);
  p = {};
  p.probability = 1.5;
  CHECK_THROWS_AS(p.validate(), InvalidInputError);
}

TEST_CASE("sparsify_frame: probability, scope and label safety") {
  Rng gen(7);
  LabeledFrame f;
  f.frame_id = "scene";
  synth::add_ground(f, 0, 60, -3, 3, 1.0, -1.6f);
  synth::add_track(f, gen, 0, -0.75, 2.0, 90.0, 3000);
  synth::add_track(f, gen, 1, 0.75, 2.0, 90.0, 3000);
  synth::add_track(f, gen, kNoInstance, 4.0, 2.0, 60.0, 500);
  synth::add_person(f, gen, 2, 20, 1, 100, -1.6f);

  SUBCASE("p = 0 is the identity for any seed") {
    SparsifyParams p;
    p.probability = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
      Rng rng(s);
      CHECK(sparsify_frame(f, p, rng) == f);
    }
  }

  SUBCASE("p = 1 caps every track instance and leaves others alone") {
    SparsifyParams p;
    Rng rng(99);
    const LabeledFrame out = sparsify_frame(f, p, rng);
    CHECK(out.size() < f.size());
    CHECK(oracle::is_sub_multiset(out, f));
    for (const auto& inst : extract_instances(f, cls::kTrack)) {
      const auto din = distances(inst);
      const auto w = resolve_window(din, p);
      LabeledFrame only;
      for (std::size_t i = 0; i < out.size(); ++i) {
        if (out.labels[i] == cls::kTrack && out.instance_ids[i] == inst.source_instance_id) {
          only.push_back(out.points[i], 0, cls::kTrack, inst.source_instance_id);
        }
      }
      std::vector<double> dout;
      for (const auto& q : only.points) dout.push_back(oracle::dist2d(q));
      for (double hi = w.d_eff - p.window; hi > 0; hi -= p.window) {
        CHECK(oracle::in_window(dout, std::max(hi - p.window, 0.0), hi) <= w.c_max);
      }
      CHECK(oracle::in_window(dout, w.d_eff - p.window, 1e9) ==
            oracle::in_window(din, w.d_eff - p.window, 1e9));
    }
    std::size_t non_track_in = 0, non_track_out = 0;
    for (auto l : f.labels) non_track_in += l != cls::kTrack;
    for (auto l : out.labels) non_track_out += l != cls::kTrack;
    CHECK(non_track_in == non_track_out);
  }

  SUBCASE("fixed seed gives identical bytes") {
    SparsifyParams p;
    Rng a(123), b(123);
    CHECK(serialize_frame(sparsify_frame(f, p, a)) == serialize_frame(sparsify_frame(f, p, b)));
  }

  SUBCASE("non-track order is preserved") {
    SparsifyParams p;
    Rng rng(5);
    const LabeledFrame out = sparsify_frame(f, p, rng);
    std::vector<Point3f> before, after;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (f.labels[i] != cls::kTrack) before.push_back(f.points[i]);
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (out.labels[i] != cls::kTrack) after.push_back(out.points[i]);
    }
    CHECK(before == after);
  }
}

TEST_CASE("frame without track points is unchanged") {
  Rng gen(1);
  LabeledFrame f;
  synth::add_person(f, gen, 0, 10, 0, 50, -1.6f);
  Rng rng(2);
  CHECK(sparsify_frame(f, SparsifyParams{}, rng) == f);
}
