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

#include "railaug/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "railaug/error.hpp"
#include "railaug/kernels.hpp"

namespace railaug {
namespace {

void check_aligned(std::size_t points, std::size_t gt, std::size_t pred) {
  if (gt != pred || points != gt) {
    throw InvalidInputError("metrics: points, gt and pred lengths differ (" +
                            std::to_string(points) + ", " + std::to_string(gt) + ", " +
                            std::to_string(pred) + ")");
  }
}

void check_labels(std::span<const ClassId> gt, std::span<const ClassId> pred, int k) {
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i] != kUnlabeled && (gt[i] < 0 || gt[i] >= k)) {
      throw InvalidInputError("metrics: ground-truth id " + std::to_string(gt[i]) +
                              " out of range at point " + std::to_string(i));
    }
    if (gt[i] != kUnlabeled && (pred[i] < 0 || pred[i] >= k)) {
      throw InvalidInputError("metrics: predicted id " + std::to_string(pred[i]) +
                              " out of range at point " + std::to_string(i));
    }
  }
}

std::optional<double> iou_from(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
  const std::uint64_t denom = tp + fp + fn;
  if (denom == 0) return std::nullopt;
  return 100.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

}  // namespace

// ---------------------------------------------------------------------------
// ConfusionMatrix

ConfusionMatrix::ConfusionMatrix(int num_classes)
    : num_classes_(num_classes),
      counts_(static_cast<std::size_t>(num_classes) * static_cast<std::size_t>(num_classes), 0) {
  if (num_classes <= 0) throw InvalidInputError("confusion matrix needs K > 0");
}

std::uint64_t ConfusionMatrix::at(ClassId gt, ClassId pred) const {
  if (gt < 0 || gt >= num_classes_ || pred < 0 || pred >= num_classes_) {
    throw InvalidInputError("confusion matrix index out of range");
  }
  return counts_[static_cast<std::size_t>(gt) * static_cast<std::size_t>(num_classes_) +
                 static_cast<std::size_t>(pred)];
}

std::uint64_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::true_positives(ClassId c) const { return at(c, c); }

std::uint64_t ConfusionMatrix::false_positives(ClassId c) const {
  std::uint64_t s = 0;
  for (ClassId g = 0; g < num_classes_; ++g) {
    if (g != c) s += at(g, c);
  }
  return s;
}

std::uint64_t ConfusionMatrix::false_negatives(ClassId c) const {
  std::uint64_t s = 0;
  for (ClassId p = 0; p < num_classes_; ++p) {
    if (p != c) s += at(c, p);
  }
  return s;
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.num_classes_ != num_classes_) {
    throw InvalidInputError("cannot merge confusion matrices of different size");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

ConfusionMatrix ConfusionMatrix::transposed() const {
  ConfusionMatrix t(num_classes_);
  const auto k = static_cast<std::size_t>(num_classes_);
  for (std::size_t g = 0; g < k; ++g) {
    for (std::size_t p = 0; p < k; ++p) t.counts_[p * k + g] = counts_[g * k + p];
  }
  return t;
}

void accumulate(ConfusionMatrix& cm, std::span<const ClassId> gt, std::span<const ClassId> pred) {
  check_aligned(gt.size(), gt.size(), pred.size());
  check_labels(gt, pred, cm.num_classes());
  kernels::omp::confusion({gt, pred, cm.num_classes()}, cm.mutable_counts());
}

std::vector<OptionalPercent> iou_per_class(const ConfusionMatrix& cm) {
  std::vector<OptionalPercent> out(static_cast<std::size_t>(cm.num_classes()));
  for (ClassId c = 0; c < cm.num_classes(); ++c) {
    out[static_cast<std::size_t>(c)] =
        iou_from(cm.true_positives(c), cm.false_positives(c), cm.false_negatives(c));
  }
  return out;
}

double miou(std::span<const OptionalPercent> ious, AbsentMode mode) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : ious) {
    if (v) {
      sum += *v;
      ++n;
    } else if (mode == AbsentMode::kStrict) {
      ++n;
    }
  }
  if (n == 0) throw InvalidInputError("miou: no class is present");
  return sum / static_cast<double>(n);
}

double mean_riou(std::span<const double> values) {
  if (values.empty()) throw InvalidInputError("mean_riou: no values");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

// ---------------------------------------------------------------------------
// RangeBinning / RangeConfusion

RangeBinning::RangeBinning() : edges_{0.0, 20.0, 40.0, 60.0, 80.0, 100.0} {}

RangeBinning::RangeBinning(std::vector<double> edges) : edges_(std::move(edges)) {
  if (edges_.size() < 2) throw InvalidInputError("range binning needs at least two edges");
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    if (!std::isfinite(edges_[i]) || (i > 0 && !(edges_[i] > edges_[i - 1]))) {
      throw InvalidInputError("range binning edges must be finite and strictly increasing");
    }
  }
}

RangeBinning RangeBinning::uniform(double lo, double hi, double width) {
  if (!(width > 0.0) || !(hi > lo)) throw InvalidInputError("range binning: bad uniform spec");
  std::vector<double> edges;
  const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / width - 1e-9));
  for (std::size_t i = 0; i < n; ++i) edges.push_back(lo + static_cast<double>(i) * width);
  edges.push_back(hi);
  return RangeBinning(std::move(edges));
}

std::optional<int> RangeBinning::bin_of(double distance) const {
  const std::int32_t b = kernels::find_bin(distance, edges_);
  if (b < 0) return std::nullopt;
  return b;
}

RangeConfusion::RangeConfusion(RangeBinning binning, int num_classes)
    : binning_(std::move(binning)),
      num_classes_(num_classes),
      bins_(static_cast<std::size_t>(binning_.num_bins()), ConfusionMatrix(num_classes)) {}

void RangeConfusion::add(std::span<const Point3f> points, std::span<const ClassId> gt,
                         std::span<const ClassId> pred) {
  check_aligned(points.size(), gt.size(), pred.size());
  check_labels(gt, pred, num_classes_);
  std::vector<double> dist(points.size());
  std::vector<std::int32_t> bin(points.size());
  kernels::omp::planar_distances(points, dist);
  kernels::omp::bin_index(dist, binning_.edges(), bin);
  const auto k2 = static_cast<std::size_t>(num_classes_) * static_cast<std::size_t>(num_classes_);
  std::vector<std::uint64_t> counts(bins_.size() * k2, 0);
  kernels::omp::binned_confusion({gt, pred, bin, binning_.num_bins(), num_classes_}, counts);
  for (std::size_t b = 0; b < bins_.size(); ++b) {
    auto dst = bins_[b].mutable_counts();
    for (std::size_t j = 0; j < k2; ++j) dst[j] += counts[b * k2 + j];
  }
}

void RangeConfusion::merge(const RangeConfusion& other) {
  if (!(other.binning_ == binning_) || other.num_classes_ != num_classes_) {
    throw InvalidInputError("cannot merge range confusions with different binning");
  }
  for (std::size_t b = 0; b < bins_.size(); ++b) bins_[b].merge(other.bins_[b]);
}

ClassRangeIoU range_iou_for_class(const RangeConfusion& rc, ClassId class_id, AbsentMode mode) {
  if (class_id < 0 || class_id >= rc.num_classes()) {
    throw InvalidInputError("range_iou: class id out of range");
  }
  ClassRangeIoU out;
  out.class_id = class_id;
  for (int b = 0; b < rc.binning().num_bins(); ++b) {
    const auto& cm = rc.bin(b);
    out.per_bin.push_back(iou_from(cm.true_positives(class_id), cm.false_positives(class_id),
                                   cm.false_negatives(class_id)));
  }
  const bool any = std::any_of(out.per_bin.begin(), out.per_bin.end(),
                               [](const auto& v) { return v.has_value(); });
  if (any) out.mean = miou(out.per_bin, mode);
  return out;
}

RIoUReport range_iou_report(const RangeConfusion& rc, std::span<const ClassId> classes,
                            AbsentMode mode) {
  RIoUReport report;
  report.binning = rc.binning();
  report.mode = mode;
  for (ClassId c : classes) report.classes.push_back(range_iou_for_class(rc, c, mode));
  return report;
}

ClassRangeIoU range_iou(std::span<const LabeledFrame> gt, std::span<const LabeledFrame> pred,
                        ClassId class_id, const RangeBinning& binning, AbsentMode mode) {
  if (gt.size() != pred.size()) {
    throw InvalidInputError("range_iou: " + std::to_string(gt.size()) + " gt frames vs " +
                            std::to_string(pred.size()) + " predicted");
  }
  RangeConfusion rc(binning);
  for (std::size_t f = 0; f < gt.size(); ++f) {
    if (gt[f].size() != pred[f].size()) {
      throw InvalidInputError("range_iou: frame '" + gt[f].frame_id + "' is misaligned");
    }
    rc.add(gt[f].points, gt[f].labels, pred[f].labels);
  }
  return range_iou_for_class(rc, class_id, mode);
}

// ---------------------------------------------------------------------------
// RecallGrid

int GridSpec::nx() const { return static_cast<int>(std::llround((x_max - x_min) / cell)); }
int GridSpec::ny() const { return static_cast<int>(std::llround((y_max - y_min) / cell)); }

void GridSpec::validate() const {
  if (!(cell > 0.0) || !(x_max > x_min) || !(y_max > y_min)) {
    throw InvalidInputError("grid spec: need cell > 0 and a non-empty extent");
  }
  if (nx() <= 0 || ny() <= 0) throw InvalidInputError("grid spec: extent smaller than a cell");
}

std::int32_t GridSpec::cell_of(double x, double y) const {
  if (!(x >= x_min && x < x_max && y >= y_min && y < y_max)) return -1;
  const auto ix = static_cast<std::int32_t>(std::floor((x - x_min) / cell));
  const auto iy = static_cast<std::int32_t>(std::floor((y - y_min) / cell));
  if (ix < 0 || ix >= nx() || iy < 0 || iy >= ny()) return -1;
  return iy * nx() + ix;
}

RecallGrid::RecallGrid(GridSpec spec, ClassId class_id)
    : spec_(spec), class_id_(class_id) {
  spec_.validate();
  tp_.assign(static_cast<std::size_t>(spec_.num_cells()), 0);
  fn_.assign(static_cast<std::size_t>(spec_.num_cells()), 0);
}

std::optional<double> RecallGrid::recall(int cell) const {
  const std::uint64_t tp = tp_.at(static_cast<std::size_t>(cell));
  const std::uint64_t fn = fn_.at(static_cast<std::size_t>(cell));
  if (tp + fn == 0) return std::nullopt;
  return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

void RecallGrid::add(std::span<const Point3f> points, std::span<const ClassId> gt,
                     std::span<const ClassId> pred) {
  check_aligned(points.size(), gt.size(), pred.size());
  std::vector<std::int32_t> cells(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    cells[i] = spec_.cell_of(points[i].x, points[i].y);
  }
  kernels::omp::recall_cells({gt, pred, cells, class_id_, spec_.num_cells()}, tp_, fn_);
}

void RecallGrid::merge(const RecallGrid& other) {
  if (!(other.spec_ == spec_) || other.class_id_ != class_id_) {
    throw InvalidInputError("cannot merge recall grids with different spec or class");
  }
  for (std::size_t i = 0; i < tp_.size(); ++i) {
    tp_[i] += other.tp_[i];
    fn_[i] += other.fn_[i];
  }
}

RecallGrid recall_grid(std::span<const LabeledFrame> gt, std::span<const LabeledFrame> pred,
                       ClassId class_id, const GridSpec& spec) {
  if (gt.size() != pred.size()) throw InvalidInputError("recall_grid: frame counts differ");
  RecallGrid grid(spec, class_id);
  for (std::size_t f = 0; f < gt.size(); ++f) {
    grid.add(gt[f].points, gt[f].labels, pred[f].labels);
  }
  return grid;
}

RecallDiff recall_diff(const RecallGrid& a, const RecallGrid& b) {
  if (!(a.spec() == b.spec())) throw InvalidInputError("recall_diff: grid specs differ");
  RecallDiff d;
  d.spec = a.spec();
  d.values.resize(static_cast<std::size_t>(a.spec().num_cells()));
  for (int c = 0; c < a.spec().num_cells(); ++c) {
    const auto ra = a.recall(c);
    const auto rb = b.recall(c);
    if (ra && rb) d.values[static_cast<std::size_t>(c)] = *ra - *rb;
  }
  return d;
}

}  // namespace railaug
