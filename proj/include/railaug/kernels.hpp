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
#include <span>
#include <vector>

#include "railaug/types.hpp"

// Per-point tally kernels behind the evaluation stack. Each kernel exists
// twice: an OpenMP version (namespace omp) used by the library, and a plain
// loop (namespace serial) kept as the reference the tests and the benchmark
// compare against. Both produce identical integer tallies and add into the
// output buffers rather than overwriting them.
namespace railaug::kernels {

// Row-major K x K counts, entry (g, p) at g * K + p. Ground-truth
// kUnlabeled is skipped. Labels must already be validated to lie in
// [0, K) (or be kUnlabeled for gt).
struct ConfusionArgs {
  std::span<const ClassId> gt;
  std::span<const ClassId> pred;
  int num_classes = 0;
};

// Same, restricted per range bin; output has bins * K * K counts.
// bin_of_point[i] < 0 means the point lies outside every bin.
struct BinnedConfusionArgs {
  std::span<const ClassId> gt;
  std::span<const ClassId> pred;
  std::span<const std::int32_t> bin_of_point;
  int num_bins = 0;
  int num_classes = 0;
};

// Per-cell TP / FN for one class. cell_of_point[i] < 0 means outside the
// grid. Output tp and fn each have num_cells entries.
struct RecallArgs {
  std::span<const ClassId> gt;
  std::span<const ClassId> pred;
  std::span<const std::int32_t> cell_of_point;
  ClassId class_id = 0;
  int num_cells = 0;
};

namespace serial {
void planar_distances(std::span<const Point3f> points, std::span<double> out);
void bin_index(std::span<const double> distances, std::span<const double> edges,
               std::span<std::int32_t> out);
void confusion(const ConfusionArgs& args, std::span<std::uint64_t> counts);
void binned_confusion(const BinnedConfusionArgs& args,
                      std::span<std::uint64_t> counts);
void recall_cells(const RecallArgs& args, std::span<std::uint64_t> tp,
                  std::span<std::uint64_t> fn);
}  // namespace serial

namespace omp {
void planar_distances(std::span<const Point3f> points, std::span<double> out);
void bin_index(std::span<const double> distances, std::span<const double> edges,
               std::span<std::int32_t> out);
void confusion(const ConfusionArgs& args, std::span<std::uint64_t> counts);
void binned_confusion(const BinnedConfusionArgs& args,
                      std::span<std::uint64_t> counts);
void recall_cells(const RecallArgs& args, std::span<std::uint64_t> tp,
                  std::span<std::uint64_t> fn);
}  // namespace omp

// Bin of d among half-open [edges[i], edges[i+1]); -1 if outside.
std::int32_t find_bin(double d, std::span<const double> edges) noexcept;

int max_threads() noexcept;

}  // namespace railaug::kernels
