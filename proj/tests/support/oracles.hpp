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

// Brute-force reference computations. Deliberately naive: per-point loops
// with no shared code from the library beyond the plain data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <tuple>
#include <utility>
#include <vector>

#include "railaug/types.hpp"

namespace oracle {

using railaug::ClassId;
using railaug::LabeledFrame;
using railaug::Point3d;
using railaug::Point3f;

inline double dist2d(const Point3f& p) {
  const double x = p.x, y = p.y;
  return std::sqrt(x * x + y * y);
}

struct Tally {
  std::uint64_t tp = 0, fp = 0, fn = 0;
};

// Per-class TP/FP/FN counted point by point; unlabeled gt is ignored.
inline std::vector<Tally> class_tallies(const std::vector<ClassId>& gt,
                                        const std::vector<ClassId>& pred, int k) {
  std::vector<Tally> t(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i] < 0) continue;
    for (int c = 0; c < k; ++c) {
      const bool g = gt[i] == c, p = pred[i] == c;
      auto& x = t[static_cast<std::size_t>(c)];
      if (g && p) ++x.tp;
      if (!g && p) ++x.fp;
      if (g && !p) ++x.fn;
    }
  }
  return t;
}

inline std::optional<double> iou(const Tally& t) {
  const std::uint64_t d = t.tp + t.fp + t.fn;
  if (d == 0) return std::nullopt;
  return 100.0 * static_cast<double>(t.tp) / static_cast<double>(d);
}

// Bin of a distance by linear scan over half-open [e_i, e_{i+1}).
inline int bin_of(double d, const std::vector<double>& edges) {
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    if (d >= edges[i] && d < edges[i + 1]) return static_cast<int>(i);
  }
  return -1;
}

// bins x classes tallies.
inline std::vector<std::vector<Tally>> binned_tallies(const std::vector<Point3f>& pts,
                                                      const std::vector<ClassId>& gt,
                                                      const std::vector<ClassId>& pred,
                                                      const std::vector<double>& edges, int k) {
  std::vector<std::vector<Tally>> out(edges.size() - 1, std::vector<Tally>(static_cast<std::size_t>(k)));
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i] < 0) continue;
    const int b = bin_of(dist2d(pts[i]), edges);
    if (b < 0) continue;
    for (int c = 0; c < k; ++c) {
      const bool g = gt[i] == c, p = pred[i] == c;
      auto& x = out[static_cast<std::size_t>(b)][static_cast<std::size_t>(c)];
      if (g && p) ++x.tp;
      if (!g && p) ++x.fp;
      if (g && !p) ++x.fn;
    }
  }
  return out;
}

struct Cell {
  std::uint64_t tp = 0, fn = 0;
};

// Keyed by (ix, iy); only cells that saw a gt point of the class.
inline std::map<std::pair<int, int>, Cell> recall_cells(const std::vector<Point3f>& pts,
                                                        const std::vector<ClassId>& gt,
                                                        const std::vector<ClassId>& pred,
                                                        ClassId c, double x_min, double x_max,
                                                        double y_min, double y_max, double cell) {
  std::map<std::pair<int, int>, Cell> out;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i] != c) continue;
    const double x = pts[i].x, y = pts[i].y;
    if (x < x_min || x >= x_max || y < y_min || y >= y_max) continue;
    const int ix = static_cast<int>(std::floor((x - x_min) / cell));
    const int iy = static_cast<int>(std::floor((y - y_min) / cell));
    auto& e = out[{ix, iy}];
    if (pred[i] == c) {
      ++e.tp;
    } else {
      ++e.fn;
    }
  }
  return out;
}

inline double arithmetic_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Largest change of any pairwise distance between two aligned point sets.
inline double max_pairwise_change(const std::vector<Point3d>& a, const std::vector<Point3d>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const double da = std::sqrt((a[i].x - a[j].x) * (a[i].x - a[j].x) +
                                  (a[i].y - a[j].y) * (a[i].y - a[j].y) +
                                  (a[i].z - a[j].z) * (a[i].z - a[j].z));
      const double db = std::sqrt((b[i].x - b[j].x) * (b[i].x - b[j].x) +
                                  (b[i].y - b[j].y) * (b[i].y - b[j].y) +
                                  (b[i].z - b[j].z) * (b[i].z - b[j].z));
      worst = std::max(worst, std::abs(da - db));
    }
  }
  return worst;
}

// Count of distances in [lo, hi).
inline std::size_t in_window(const std::vector<double>& d, double lo, double hi) {
  std::size_t n = 0;
  for (double x : d) n += (x >= lo && x < hi) ? 1 : 0;
  return n;
}

// Multiset containment of points (as exact float triples + attributes).
inline bool is_sub_multiset(const LabeledFrame& sub, const LabeledFrame& super) {
  using Key = std::tuple<float, float, float, float, ClassId, railaug::InstanceId>;
  std::multiset<Key> pool;
  for (std::size_t i = 0; i < super.size(); ++i) {
    pool.insert({super.points[i].x, super.points[i].y, super.points[i].z, super.intensity[i],
                 super.labels[i], super.instance_ids[i]});
  }
  for (std::size_t i = 0; i < sub.size(); ++i) {
    auto it = pool.find({sub.points[i].x, sub.points[i].y, sub.points[i].z, sub.intensity[i],
                         sub.labels[i], sub.instance_ids[i]});
    if (it == pool.end()) return false;
    pool.erase(it);
  }
  return true;
}

}  // namespace oracle
