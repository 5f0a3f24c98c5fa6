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

#include "railaug/paste.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include <nlohmann/json.hpp>

#include "railaug/error.hpp"
#include "railaug/geometry.hpp"
#include "railaug/pcd_io.hpp"

namespace railaug {
namespace {

template <typename T>
double median_of(std::vector<T> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return static_cast<double>(values[n / 2]);
  return 0.5 * (static_cast<double>(values[n / 2 - 1]) + static_cast<double>(values[n / 2]));
}

Instance with_points(const Instance& like, std::vector<Point3d> points,
                     std::vector<float> intensity) {
  Instance out;
  out.class_id = like.class_id;
  out.source_frame = like.source_frame;
  out.source_instance_id = like.source_instance_id;
  out.points = std::move(points);
  out.intensity = std::move(intensity);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Registry

InstanceRegistry::InstanceRegistry(std::vector<RegistryEntry> entries, std::size_t min_points)
    : entries_(std::move(entries)), min_points_(min_points) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& frame = entries_[i].instance.source_frame;
    auto it = std::find(donors_.begin(), donors_.end(), frame);
    if (it == donors_.end()) {
      donors_.push_back(frame);
      donor_entries_.emplace_back();
      it = donors_.end() - 1;
    }
    donor_entries_[static_cast<std::size_t>(it - donors_.begin())].push_back(i);
  }
}

InstanceRegistry build_registry(std::span<const LabeledFrame> train_frames,
                                std::size_t min_points, ClassId class_id) {
  std::vector<RegistryEntry> entries;
  for (const auto& frame : train_frames) {
    for (auto& inst : extract_instances(frame, class_id)) {
      if (inst.size() < min_points || inst.empty()) continue;
      const double d = planar_distance(centroid(inst));
      entries.push_back({std::move(inst), d});
    }
  }
  if (entries.empty()) {
    throw InvalidInputError("build_registry: no instance with at least " +
                            std::to_string(min_points) + " points");
  }
  return InstanceRegistry(std::move(entries), min_points);
}

void save_registry(const InstanceRegistry& registry, const std::filesystem::path& pcd_path,
                   const std::filesystem::path& json_path) {
  LabeledFrame all;
  all.frame_id = "registry";
  nlohmann::json meta;
  meta["min_points"] = registry.min_points();
  meta["entries"] = nlohmann::json::array();
  for (std::size_t i = 0; i < registry.size(); ++i) {
    const auto& e = registry.entries()[i];
    for (std::size_t j = 0; j < e.instance.size(); ++j) {
      all.push_back(to_float(e.instance.points[j]), e.instance.intensity[j],
                    e.instance.class_id, static_cast<InstanceId>(i));
    }
    meta["entries"].push_back({{"source_frame", e.instance.source_frame},
                               {"source_instance_id", e.instance.source_instance_id},
                               {"class_id", e.instance.class_id},
                               {"points", e.instance.size()},
                               {"centroid_distance", e.centroid_distance}});
  }
  write_frame(all, pcd_path, PcdFormat::kBinary);
  std::ofstream out(json_path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + json_path.string() + "'");
  out << meta.dump(2) << '\n';
}

InstanceRegistry load_registry(const std::filesystem::path& pcd_path,
                               const std::filesystem::path& json_path) {
  const LabeledFrame all = read_frame(pcd_path);
  std::ifstream in(json_path);
  if (!in) throw IoError("cannot open '" + json_path.string() + "'");
  nlohmann::json meta;
  try {
    in >> meta;
    std::vector<RegistryEntry> entries;
    std::size_t cursor = 0;
    const auto& list = meta.at("entries");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto& m = list[i];
      const auto count = m.at("points").get<std::size_t>();
      RegistryEntry e;
      e.instance.class_id = m.at("class_id").get<ClassId>();
      e.instance.source_frame = m.at("source_frame").get<std::string>();
      e.instance.source_instance_id = m.at("source_instance_id").get<InstanceId>();
      e.centroid_distance = m.at("centroid_distance").get<double>();
      for (std::size_t j = 0; j < count; ++j, ++cursor) {
        if (cursor >= all.size() || all.instance_ids[cursor] != static_cast<InstanceId>(i)) {
          throw InvalidInputError("registry point file does not match its metadata");
        }
        e.instance.points.push_back(to_double(all.points[cursor]));
        e.instance.intensity.push_back(all.intensity[cursor]);
      }
      entries.push_back(std::move(e));
    }
    if (cursor != all.size()) {
      throw InvalidInputError("registry point file has extra points");
    }
    return InstanceRegistry(std::move(entries), meta.at("min_points").get<std::size_t>());
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError("registry json '" + json_path.string() + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Density profile

DensityProfile::DensityProfile(std::vector<DensityBin> bins) : bins_(std::move(bins)) {
  if (bins_.empty()) throw InvalidInputError("density profile needs at least one bin");
  bool any = false;
  for (std::size_t i = 0; i < bins_.size(); ++i) {
    if (!(bins_[i].lo < bins_[i].hi) || (i > 0 && bins_[i].lo != bins_[i - 1].hi)) {
      throw InvalidInputError("density profile bins must be contiguous and ordered");
    }
    if (bins_[i].populated) {
      if (!(bins_[i].expected_points > 0.0)) {
        throw InvalidInputError("density profile: populated bin with N <= 0");
      }
      any = true;
    }
  }
  if (!any) throw InvalidInputError("density profile has no populated bin");
}

double DensityProfile::bin_width() const { return bins_.front().hi - bins_.front().lo; }

double DensityProfile::expected_points(double distance) const {
  const double width = bin_width();
  const double origin = bins_.front().lo;
  const double rel = std::max(distance - origin, 0.0) / width;
  const auto idx = static_cast<std::ptrdiff_t>(std::floor(rel));
  const auto last = static_cast<std::ptrdiff_t>(bins_.size()) - 1;
  if (idx <= last && bins_[static_cast<std::size_t>(idx)].populated) {
    return bins_[static_cast<std::size_t>(idx)].expected_points;
  }
  std::ptrdiff_t best = -1;
  std::ptrdiff_t best_gap = std::numeric_limits<std::ptrdiff_t>::max();
  for (std::ptrdiff_t i = 0; i <= last; ++i) {
    if (!bins_[static_cast<std::size_t>(i)].populated) continue;
    const std::ptrdiff_t gap = i > idx ? i - idx : idx - i;
    if (gap < best_gap) {
      best_gap = gap;
      best = i;
    }
  }
  const auto& ref = bins_[static_cast<std::size_t>(best)];
  const double d = std::max(distance, 1e-3);
  const double ratio = ref.ref_distance / d;
  return ref.expected_points * ratio * ratio;
}

DensityProfile build_density_profile(const InstanceRegistry& registry, double bin_width,
                                     double max_range) {
  if (registry.empty()) throw InvalidInputError("build_density_profile: empty registry");
  if (!(bin_width > 0.0)) throw InvalidInputError("build_density_profile: bin width <= 0");
  double far = max_range;
  for (const auto& e : registry.entries()) far = std::max(far, e.centroid_distance);
  auto n_bins = static_cast<std::size_t>(std::ceil(far / bin_width));
  n_bins = std::max<std::size_t>(n_bins, 1);

  std::vector<std::vector<std::size_t>> counts(n_bins);
  std::vector<std::vector<double>> dists(n_bins);
  for (const auto& e : registry.entries()) {
    auto b = static_cast<std::size_t>(std::floor(e.centroid_distance / bin_width));
    b = std::min(b, n_bins - 1);
    counts[b].push_back(e.instance.size());
    dists[b].push_back(e.centroid_distance);
  }
  std::vector<DensityBin> bins(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    bins[b].lo = static_cast<double>(b) * bin_width;
    bins[b].hi = static_cast<double>(b + 1) * bin_width;
    bins[b].instances = counts[b].size();
    if (!counts[b].empty()) {
      bins[b].populated = true;
      bins[b].expected_points = median_of(counts[b]);
      bins[b].ref_distance = median_of(dists[b]);
    }
  }
  DensityProfile populated_only(bins);
  for (auto& b : bins) {
    if (!b.populated) b.expected_points = populated_only.expected_points(0.5 * (b.lo + b.hi));
  }
  return DensityProfile(std::move(bins));
}

nlohmann::json to_json(const DensityProfile& profile) {
  nlohmann::json j;
  j["bin_width"] = profile.bin_width();
  j["bins"] = nlohmann::json::array();
  for (const auto& b : profile.bins()) {
    j["bins"].push_back({{"lo", b.lo},
                         {"hi", b.hi},
                         {"instances", b.instances},
                         {"expected_points", b.expected_points},
                         {"ref_distance", b.ref_distance},
                         {"populated", b.populated}});
  }
  return j;
}

DensityProfile density_profile_from_json(const nlohmann::json& j) {
  try {
    std::vector<DensityBin> bins;
    for (const auto& b : j.at("bins")) {
      DensityBin bin;
      bin.lo = b.at("lo").get<double>();
      bin.hi = b.at("hi").get<double>();
      bin.instances = b.at("instances").get<std::size_t>();
      bin.expected_points = b.at("expected_points").get<double>();
      bin.ref_distance = b.at("ref_distance").get<double>();
      bin.populated = b.at("populated").get<bool>();
      bins.push_back(bin);
    }
    return DensityProfile(std::move(bins));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError(std::string("density profile json: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Transforms

void PasteParams::validate() const {
  auto unit = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!unit(flip_probability)) throw InvalidInputError("paste: flip probability outside [0, 1]");
  if (!unit(probability)) throw InvalidInputError("paste: probability outside [0, 1]");
  if (!(rotation_min_deg <= rotation_max_deg)) {
    throw InvalidInputError("paste: rotation range is inverted");
  }
  if (!(y_shift_min <= y_shift_max)) throw InvalidInputError("paste: y-shift range is inverted");
  if (!(count_tolerance >= 0.0 && count_tolerance < 1.0)) {
    throw InvalidInputError("paste: count tolerance must lie in [0, 1)");
  }
  if (!(ground_search_radius >= 0.0)) throw InvalidInputError("paste: negative search radius");
  if (!(max_height_above_track > 0.0)) {
    throw InvalidInputError("paste: max height above track must be > 0");
  }
}

Instance mirror_about_centroid(const Instance& instance, MirrorAxis axis) {
  const Point3d c = centroid(instance);
  std::vector<Point3d> pts = instance.points;
  for (auto& p : pts) {
    if (axis == MirrorAxis::kX) {
      p.x = c.x - (p.x - c.x);
    } else {
      p.y = c.y - (p.y - c.y);
    }
  }
  return with_points(instance, std::move(pts), instance.intensity);
}

Instance flip_instance(const Instance& instance, Rng& rng, const PasteParams& params) {
  if (!bernoulli(rng, params.flip_probability)) return instance;
  return mirror_about_centroid(instance, params.mirror_axis);
}

Instance rotate_about_centroid(const Instance& instance, double radians) {
  const Point3d c = centroid(instance);
  const double cs = std::cos(radians);
  const double sn = std::sin(radians);
  std::vector<Point3d> pts = instance.points;
  for (auto& p : pts) {
    const double dx = p.x - c.x;
    const double dy = p.y - c.y;
    p.x = c.x + cs * dx - sn * dy;
    p.y = c.y + sn * dx + cs * dy;
  }
  return with_points(instance, std::move(pts), instance.intensity);
}

Instance rotate_instance(const Instance& instance, Rng& rng, const PasteParams& params) {
  const double deg = uniform_real(rng, params.rotation_min_deg, params.rotation_max_deg);
  return rotate_about_centroid(instance, deg * std::numbers::pi / 180.0);
}

Instance translate(const Instance& instance, double dx, double dy, double dz) {
  std::vector<Point3d> pts = instance.points;
  for (auto& p : pts) {
    p.x += dx;
    p.y += dy;
    p.z += dz;
  }
  return with_points(instance, std::move(pts), instance.intensity);
}

Instance shift_y(const Instance& instance, Rng& rng, const PasteParams& params) {
  return translate(instance, 0.0, uniform_real(rng, params.y_shift_min, params.y_shift_max), 0.0);
}

CountRange target_count_range(double expected, double tolerance) {
  // The epsilon keeps integer-valued products such as 0.9 * 120 from
  // rounding across an integer boundary.
  constexpr double kEps = 1e-9;
  const double lo = std::ceil((1.0 - tolerance) * expected - kEps);
  const double hi = std::floor((1.0 + tolerance) * expected + kEps);
  if (lo > hi || hi < 1.0) {
    const auto n = static_cast<std::size_t>(std::max(1.0, std::round(expected)));
    return {n, n};
  }
  return {static_cast<std::size_t>(std::max(lo, 1.0)), static_cast<std::size_t>(hi)};
}

double sample_target_distance(double current, const DensityProfile& profile, Rng& rng) {
  const auto& bins = profile.bins();
  std::vector<double> weights(bins.size(), 0.0);
  bool any = false;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    if (bins[i].hi > current) {
      weights[i] = 1.0 / (static_cast<double>(bins[i].instances) + 1.0);
      any = true;
    }
  }
  if (!any) return current;
  const auto& b = bins[weighted_index(rng, weights)];
  return uniform_real(rng, std::max(b.lo, current), b.hi);
}

Instance shift_x_to_distance(const Instance& instance, double target,
                             const DensityProfile& profile, Rng& rng,
                             const PasteParams& params) {
  const Point3d c = centroid(instance);
  const double current = std::hypot(c.x, c.y);
  double dx = 0.0;
  if (target > current) dx = std::sqrt(target * target - c.y * c.y) - c.x;
  Instance moved = dx != 0.0 ? translate(instance, dx, 0.0, 0.0) : instance;

  const CountRange range = target_count_range(profile.expected_points(target),
                                              params.count_tolerance);
  const auto n_target = static_cast<std::size_t>(uniform_int(
      rng, static_cast<std::int64_t>(range.lo), static_cast<std::int64_t>(range.hi)));
  if (moved.size() <= n_target) return moved;

  std::vector<Point3d> pts;
  std::vector<float> inten;
  pts.reserve(n_target);
  inten.reserve(n_target);
  for (std::size_t i : sample_without_replacement(rng, moved.size(), n_target)) {
    pts.push_back(moved.points[i]);
    inten.push_back(moved.intensity[i]);
  }
  return with_points(moved, std::move(pts), std::move(inten));
}

Instance shift_x_with_downsample(const Instance& instance, const DensityProfile& profile,
                                 Rng& rng, const PasteParams& params) {
  const Point3d c = centroid(instance);
  const double target = sample_target_distance(std::hypot(c.x, c.y), profile, rng);
  return shift_x_to_distance(instance, target, profile, rng, params);
}

std::optional<double> estimate_ground_height(const LabeledFrame& scan, const Aabb2D& box,
                                             const PasteParams& params) {
  double sum = 0.0;
  std::size_t n = 0;
  std::vector<float> track_z;
  for (std::size_t i = 0; i < scan.size(); ++i) {
    const auto& p = scan.points[i];
    if (box.contains(p.x, p.y)) {
      sum += p.z;
      ++n;
    }
    if (scan.labels[i] == cls::kTrack) track_z.push_back(p.z);
  }

  std::optional<double> estimate;
  if (n > 0) {
    estimate = sum / static_cast<double>(n);
  } else if (!track_z.empty()) {
    const double cx = 0.5 * (box.x_min + box.x_max);
    const double cy = 0.5 * (box.y_min + box.y_max);
    std::vector<std::pair<double, double>> near;  // (distance, z)
    for (std::size_t i = 0; i < scan.size(); ++i) {
      if (scan.labels[i] != cls::kTrack) continue;
      const auto& p = scan.points[i];
      const double d = std::hypot(p.x - cx, p.y - cy);
      if (d <= params.ground_search_radius) near.emplace_back(d, p.z);
    }
    if (!near.empty()) {
      const std::size_t k = std::min(near.size(), std::max<std::size_t>(params.ground_track_neighbors, 1));
      std::partial_sort(near.begin(), near.begin() + static_cast<std::ptrdiff_t>(k), near.end());
      double zsum = 0.0;
      for (std::size_t i = 0; i < k; ++i) zsum += near[i].second;
      estimate = zsum / static_cast<double>(k);
    }
  }
  if (!estimate) return std::nullopt;
  if (!track_z.empty()) {
    const double track_ref = median_of(track_z);
    if (*estimate - track_ref > params.max_height_above_track) return std::nullopt;
  }
  return estimate;
}

Instance shift_z_to_ground(const Instance& instance, double ground) {
  if (instance.empty()) throw InvalidInputError("shift_z_to_ground: empty instance");
  double min_z = instance.points.front().z;
  for (const auto& p : instance.points) min_z = std::min(min_z, p.z);
  return translate(instance, 0.0, 0.0, ground - min_z);
}

Instance transform_for_paste(const Instance& instance, const DensityProfile& profile, Rng& rng,
                             const PasteParams& params) {
  Instance out = flip_instance(instance, rng, params);
  out = rotate_instance(out, rng, params);
  out = shift_y(out, rng, params);
  return shift_x_with_downsample(out, profile, rng, params);
}

PasteResult paste_instances_detailed(const LabeledFrame& scan, const InstanceRegistry& registry,
                                     const DensityProfile& profile, const PasteParams& params,
                                     Rng& rng) {
  params.validate();
  PasteResult result;
  result.frame = scan;
  if (registry.empty()) return result;

  const std::size_t donor = uniform_index(rng, registry.donor_frames().size());
  result.donor_frame = registry.donor_frames()[donor];
  std::vector<std::size_t> picks = registry.donor_entries(donor);
  if (params.max_instances > 0 && picks.size() > params.max_instances) {
    std::vector<std::size_t> subset;
    for (std::size_t i : sample_without_replacement(rng, picks.size(), params.max_instances)) {
      subset.push_back(picks[i]);
    }
    picks = std::move(subset);
  }

  InstanceId next_id = kNoInstance;
  for (InstanceId id : scan.instance_ids) next_id = std::max(next_id, id);
  ++next_id;

  for (std::size_t entry : picks) {
    const Instance& source = registry.entries()[entry].instance;
    Instance inst = transform_for_paste(source, profile, rng, params);
    const auto ground = estimate_ground_height(scan, footprint(inst), params);
    if (!ground) {
      ++result.skipped_instances;
      continue;
    }
    inst = shift_z_to_ground(inst, *ground);
    for (std::size_t j = 0; j < inst.size(); ++j) {
      result.frame.push_back(to_float(inst.points[j]), inst.intensity[j], cls::kPerson, next_id);
    }
    ++next_id;
    ++result.pasted_instances;
    result.pasted_points += inst.size();
  }
  return result;
}

LabeledFrame paste_instances(const LabeledFrame& scan, const InstanceRegistry& registry,
                             const DensityProfile& profile, const PasteParams& params, Rng& rng) {
  return paste_instances_detailed(scan, registry, profile, params, rng).frame;
}

}  // namespace railaug
