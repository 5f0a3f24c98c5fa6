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
#include <optional>
#include <span>
#include <vector>

#include "railaug/types.hpp"

namespace railaug {

// Percentages are kept at full precision; rounding happens at export.
using OptionalPercent = std::optional<double>;

class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int num_classes = cls::kCount);

  int num_classes() const { return num_classes_; }
  // (gt, pred) count.
  std::uint64_t at(ClassId gt, ClassId pred) const;
  std::uint64_t total() const;
  std::span<const std::uint64_t> counts() const { return counts_; }
  std::span<std::uint64_t> mutable_counts() { return counts_; }

  std::uint64_t true_positives(ClassId c) const;
  std::uint64_t false_positives(ClassId c) const;
  std::uint64_t false_negatives(ClassId c) const;

  // Associative and commutative. Throws InvalidInputError on size mismatch.
  void merge(const ConfusionMatrix& other);
  ConfusionMatrix transposed() const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  int num_classes_;
  std::vector<std::uint64_t> counts_;
};

// Adds one count per (gt, pred) pair; gt == kUnlabeled is skipped. Throws
// InvalidInputError on length mismatch or out-of-range ids.
void accumulate(ConfusionMatrix& cm, std::span<const ClassId> gt,
                std::span<const ClassId> pred);

// 100 * TP / (TP + FP + FN); absent when the denominator is 0.
std::vector<OptionalPercent> iou_per_class(const ConfusionMatrix& cm);

enum class AbsentMode {
  kSkip,    // average only present values
  kStrict,  // absent counts as 0
};

// Throws InvalidInputError if no value is present (kSkip) or the list is
// empty (kStrict).
double miou(std::span<const OptionalPercent> ious, AbsentMode mode = AbsentMode::kSkip);

// (1/N) sum rIoU_i. Throws InvalidInputError on an empty list.
double mean_riou(std::span<const double> values);

// Half-open bins [edges[i], edges[i+1]).
class RangeBinning {
 public:
  RangeBinning();  // 0, 20, 40, 60, 80, 100
  // Throws InvalidInputError unless at least two strictly increasing edges.
  explicit RangeBinning(std::vector<double> edges);

  static RangeBinning uniform(double lo, double hi, double width);

  const std::vector<double>& edges() const { return edges_; }
  int num_bins() const { return static_cast<int>(edges_.size()) - 1; }
  double lo(int bin) const { return edges_.at(bin); }
  double hi(int bin) const { return edges_.at(bin + 1); }
  std::optional<int> bin_of(double distance) const;

  friend bool operator==(const RangeBinning&, const RangeBinning&) = default;

 private:
  std::vector<double> edges_;
};

// One confusion matrix per range bin, binned by planar distance of the
// ground-truth point.
class RangeConfusion {
 public:
  explicit RangeConfusion(RangeBinning binning = {}, int num_classes = cls::kCount);

  const RangeBinning& binning() const { return binning_; }
  int num_classes() const { return num_classes_; }
  const ConfusionMatrix& bin(int i) const { return bins_.at(i); }

  void add(std::span<const Point3f> points, std::span<const ClassId> gt,
           std::span<const ClassId> pred);
  void merge(const RangeConfusion& other);

 private:
  RangeBinning binning_;
  int num_classes_;
  std::vector<ConfusionMatrix> bins_;
};

struct ClassRangeIoU {
  ClassId class_id = 0;
  std::vector<OptionalPercent> per_bin;
  std::optional<double> mean;  // absent when no bin is present
};

struct RIoUReport {
  RangeBinning binning;
  AbsentMode mode = AbsentMode::kSkip;
  std::vector<ClassRangeIoU> classes;
};

ClassRangeIoU range_iou_for_class(const RangeConfusion& rc, ClassId class_id,
                                  AbsentMode mode = AbsentMode::kSkip);
RIoUReport range_iou_report(const RangeConfusion& rc,
                            std::span<const ClassId> classes,
                            AbsentMode mode = AbsentMode::kSkip);

// Convenience over aligned gt/pred frames (pred frames supply labels only).
// Throws InvalidInputError if frame counts or point counts differ.
ClassRangeIoU range_iou(std::span<const LabeledFrame> gt,
                        std::span<const LabeledFrame> pred, ClassId class_id,
                        const RangeBinning& binning = {},
                        AbsentMode mode = AbsentMode::kSkip);

struct GridSpec {
  double x_min = 0.0;
  double x_max = 100.0;
  double y_min = -20.0;
  double y_max = 20.0;
  double cell = 1.0;

  int nx() const;
  int ny() const;
  int num_cells() const { return nx() * ny(); }
  // Row-major, iy * nx + ix; -1 outside the extent.
  std::int32_t cell_of(double x, double y) const;
  void validate() const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

class RecallGrid {
 public:
  explicit RecallGrid(GridSpec spec = {}, ClassId class_id = cls::kTrack);

  const GridSpec& spec() const { return spec_; }
  ClassId class_id() const { return class_id_; }
  std::uint64_t tp(int cell) const { return tp_.at(cell); }
  std::uint64_t fn(int cell) const { return fn_.at(cell); }
  std::span<std::uint64_t> mutable_tp() { return tp_; }
  std::span<std::uint64_t> mutable_fn() { return fn_; }
  // TP / (TP + FN); absent when no gt point of the class fell in the cell.
  std::optional<double> recall(int cell) const;

  void add(std::span<const Point3f> points, std::span<const ClassId> gt,
           std::span<const ClassId> pred);
  // Throws InvalidInputError on spec or class mismatch.
  void merge(const RecallGrid& other);

  friend bool operator==(const RecallGrid&, const RecallGrid&) = default;

 private:
  GridSpec spec_;
  ClassId class_id_;
  std::vector<std::uint64_t> tp_;
  std::vector<std::uint64_t> fn_;
};

RecallGrid recall_grid(std::span<const LabeledFrame> gt,
                       std::span<const LabeledFrame> pred, ClassId class_id,
                       const GridSpec& spec = {});

struct RecallDiff {
  GridSpec spec;
  std::vector<std::optional<double>> values;  // a - b, per cell
};

// Throws InvalidInputError if the specs differ.
RecallDiff recall_diff(const RecallGrid& a, const RecallGrid& b);

}  // namespace railaug
