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

#include "railaug/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace railaug::kernels {

std::int32_t find_bin(double d, std::span<const double> edges) noexcept {
  if (edges.size() < 2 || !(d >= edges.front()) || !(d < edges.back())) return -1;
  // First edge strictly greater than d closes the bin.
  const auto it = std::upper_bound(edges.begin(), edges.end(), d);
  return static_cast<std::int32_t>(it - edges.begin()) - 1;
}

int max_threads() noexcept {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace serial {

void planar_distances(std::span<const Point3f> points, std::span<double> out) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    out[i] = std::hypot(static_cast<double>(points[i].x), static_cast<double>(points[i].y));
  }
}

void bin_index(std::span<const double> distances, std::span<const double> edges,
               std::span<std::int32_t> out) {
  for (std::size_t i = 0; i < distances.size(); ++i) out[i] = find_bin(distances[i], edges);
}

void confusion(const ConfusionArgs& args, std::span<std::uint64_t> counts) {
  const auto k = static_cast<std::size_t>(args.num_classes);
  for (std::size_t i = 0; i < args.gt.size(); ++i) {
    if (args.gt[i] == kUnlabeled) continue;
    ++counts[static_cast<std::size_t>(args.gt[i]) * k + static_cast<std::size_t>(args.pred[i])];
  }
}

void binned_confusion(const BinnedConfusionArgs& args, std::span<std::uint64_t> counts) {
  const auto k = static_cast<std::size_t>(args.num_classes);
  for (std::size_t i = 0; i < args.gt.size(); ++i) {
    const std::int32_t b = args.bin_of_point[i];
    if (b < 0 || args.gt[i] == kUnlabeled) continue;
    ++counts[(static_cast<std::size_t>(b) * k + static_cast<std::size_t>(args.gt[i])) * k +
             static_cast<std::size_t>(args.pred[i])];
  }
}

void recall_cells(const RecallArgs& args, std::span<std::uint64_t> tp,
                  std::span<std::uint64_t> fn) {
  for (std::size_t i = 0; i < args.gt.size(); ++i) {
    const std::int32_t c = args.cell_of_point[i];
    if (c < 0 || args.gt[i] != args.class_id) continue;
    if (args.pred[i] == args.class_id) {
      ++tp[static_cast<std::size_t>(c)];
    } else {
      ++fn[static_cast<std::size_t>(c)];
    }
  }
}

}  // namespace serial

namespace omp {
namespace {

// Below this many points the thread team costs more than it saves.
constexpr std::size_t kMinParallel = 4096;

// Each thread tallies into a private buffer of `width` counters; buffers are
// summed into `out` at the end. Integer sums make the result independent of
// scheduling.
template <typename Body>
void tally_parallel(std::size_t n, std::size_t width, std::span<std::uint64_t> out,
                    Body body) {
#ifdef _OPENMP
  if (n < kMinParallel || omp_get_max_threads() == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i, out.data());
    return;
  }
#pragma omp parallel
  {
    std::vector<std::uint64_t> local(width, 0);
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t i = 0; i < count; ++i) body(static_cast<std::size_t>(i), local.data());
#pragma omp critical(railaug_tally_merge)
    for (std::size_t j = 0; j < width; ++j) out[j] += local[j];
  }
#else
  (void)width;
  for (std::size_t i = 0; i < n; ++i) body(i, out.data());
#endif
}

}  // namespace

void planar_distances(std::span<const Point3f> points, std::span<double> out) {
  const auto n = static_cast<std::ptrdiff_t>(points.size());
#pragma omp parallel for schedule(static) if (points.size() >= kMinParallel)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[i] = std::hypot(static_cast<double>(points[i].x), static_cast<double>(points[i].y));
  }
}

void bin_index(std::span<const double> distances, std::span<const double> edges,
               std::span<std::int32_t> out) {
  const auto n = static_cast<std::ptrdiff_t>(distances.size());
#pragma omp parallel for schedule(static) if (distances.size() >= kMinParallel)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = find_bin(distances[i], edges);
}

void confusion(const ConfusionArgs& args, std::span<std::uint64_t> counts) {
  const auto k = static_cast<std::size_t>(args.num_classes);
  tally_parallel(args.gt.size(), k * k, counts, [&](std::size_t i, std::uint64_t* acc) {
    if (args.gt[i] == kUnlabeled) return;
    ++acc[static_cast<std::size_t>(args.gt[i]) * k + static_cast<std::size_t>(args.pred[i])];
  });
}

void binned_confusion(const BinnedConfusionArgs& args, std::span<std::uint64_t> counts) {
  const auto k = static_cast<std::size_t>(args.num_classes);
  const auto width = static_cast<std::size_t>(args.num_bins) * k * k;
  tally_parallel(args.gt.size(), width, counts, [&](std::size_t i, std::uint64_t* acc) {
    const std::int32_t b = args.bin_of_point[i];
    if (b < 0 || args.gt[i] == kUnlabeled) return;
    ++acc[(static_cast<std::size_t>(b) * k + static_cast<std::size_t>(args.gt[i])) * k +
          static_cast<std::size_t>(args.pred[i])];
  });
}

void recall_cells(const RecallArgs& args, std::span<std::uint64_t> tp,
                  std::span<std::uint64_t> fn) {
  // tp and fn are interleaved in one buffer so a single tally pass fills both.
  const auto cells = static_cast<std::size_t>(args.num_cells);
  std::vector<std::uint64_t> both(2 * cells, 0);
  tally_parallel(args.gt.size(), 2 * cells, both, [&](std::size_t i, std::uint64_t* acc) {
    const std::int32_t c = args.cell_of_point[i];
    if (c < 0 || args.gt[i] != args.class_id) return;
    ++acc[2 * static_cast<std::size_t>(c) + (args.pred[i] == args.class_id ? 0 : 1)];
  });
  for (std::size_t c = 0; c < cells; ++c) {
    tp[c] += both[2 * c];
    fn[c] += both[2 * c + 1];
  }
}

}  // namespace omp
}  // namespace railaug::kernels
