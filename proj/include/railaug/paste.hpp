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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "railaug/random.hpp"
#include "railaug/types.hpp"

namespace railaug {

// ---------------------------------------------------------------------------
// Registry of donor instances

struct RegistryEntry {
  Instance instance;
  double centroid_distance = 0.0;  // planar, meters
};

// Person instances harvested from training frames, grouped by donor frame
// in the order the frames were given.
class InstanceRegistry {
 public:
  InstanceRegistry() = default;
  InstanceRegistry(std::vector<RegistryEntry> entries, std::size_t min_points);

  const std::vector<RegistryEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t min_points() const { return min_points_; }

  // Distinct donor frames, first-seen order, and the entry indices of each.
  const std::vector<std::string>& donor_frames() const { return donors_; }
  const std::vector<std::size_t>& donor_entries(std::size_t donor) const {
    return donor_entries_.at(donor);
  }

 private:
  std::vector<RegistryEntry> entries_;
  std::size_t min_points_ = 0;
  std::vector<std::string> donors_;
  std::vector<std::vector<std::size_t>> donor_entries_;
};

// Throws InvalidInputError when no instance of class_id has at least
// min_points points.
InstanceRegistry build_registry(std::span<const LabeledFrame> train_frames,
                                std::size_t min_points = 5,
                                ClassId class_id = cls::kPerson);

// registry.pcd holds all points with the instance column set to the entry
// index; the JSON sidecar carries per-entry metadata.
void save_registry(const InstanceRegistry& registry,
                   const std::filesystem::path& pcd_path,
                   const std::filesystem::path& json_path);
InstanceRegistry load_registry(const std::filesystem::path& pcd_path,
                               const std::filesystem::path& json_path);

// ---------------------------------------------------------------------------
// Points-per-instance vs range

struct DensityBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t instances = 0;
  double expected_points = 0.0;  // median for populated bins
  double ref_distance = 0.0;     // median centroid distance of the bin
  bool populated = false;
};

class DensityProfile {
 public:
  DensityProfile() = default;
  explicit DensityProfile(std::vector<DensityBin> bins);

  const std::vector<DensityBin>& bins() const { return bins_; }
  double bin_width() const;

  // Populated bin: its median. Otherwise N_ref * (d_ref / d)^2 from the
  // nearest populated bin by index (lower index on ties).
  double expected_points(double distance) const;

 private:
  std::vector<DensityBin> bins_;
};

// Bins of bin_width over [0, max_range), with max_range raised to cover
// the farthest instance. Empty bins store the extrapolated value at their
// center.
DensityProfile build_density_profile(const InstanceRegistry& registry,
                                     double bin_width = 20.0,
                                     double max_range = 100.0);

nlohmann::json to_json(const DensityProfile& profile);
DensityProfile density_profile_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Per-instance transforms

enum class MirrorAxis { kX, kY };

struct PasteParams {
  double flip_probability = 0.5;
  MirrorAxis mirror_axis = MirrorAxis::kX;
  double rotation_min_deg = -180.0;
  double rotation_max_deg = 180.0;
  double y_shift_min = -2.0;
  double y_shift_max = 2.0;
  double count_tolerance = 0.1;      // n* drawn from [N - tol N, N + tol N]
  std::size_t max_instances = 0;     // per frame; 0 = no cap
  std::size_t min_points = 5;        // registry threshold
  double ground_search_radius = 10.0;
  std::size_t ground_track_neighbors = 16;
  double max_height_above_track = 1.5;
  double probability = 1.0;          // online mode
  std::uint64_t seed = 0;

  void validate() const;
};

// Mirror across the plane through the centroid orthogonal to the axis.
Instance mirror_about_centroid(const Instance& instance, MirrorAxis axis);
Instance flip_instance(const Instance& instance, Rng& rng,
                       const PasteParams& params = {});

Instance rotate_about_centroid(const Instance& instance, double radians);
Instance rotate_instance(const Instance& instance, Rng& rng,
                         const PasteParams& params = {});

Instance translate(const Instance& instance, double dx, double dy, double dz);
Instance shift_y(const Instance& instance, Rng& rng,
                 const PasteParams& params = {});

// Inclusive integer bounds [ceil((1 - tol) N), floor((1 + tol) N)]. If the
// interval is empty both bounds collapse to max(1, round(N)).
struct CountRange {
  std::size_t lo = 0;
  std::size_t hi = 0;
};
CountRange target_count_range(double expected, double tolerance = 0.1);

// Translates along +x so the centroid's planar distance becomes `target`
// (target >= current distance), then keeps a uniform random subset of n*
// points when the instance is larger. Never adds points.
Instance shift_x_to_distance(const Instance& instance, double target,
                             const DensityProfile& profile, Rng& rng,
                             const PasteParams& params = {});

// Target distance: a profile bin at or beyond the current distance is
// chosen with weight 1 / (instances + 1), then a uniform distance inside it
// (never below current). Returns current when no bin lies beyond it.
double sample_target_distance(double current, const DensityProfile& profile,
                              Rng& rng);

Instance shift_x_with_downsample(const Instance& instance,
                                 const DensityProfile& profile, Rng& rng,
                                 const PasteParams& params = {});

// Mean z of scan points inside box; else mean z of up to k nearest track
// points within the search radius of the box center. Estimates more than
// max_height_above_track above the median track z are rejected.
std::optional<double> estimate_ground_height(const LabeledFrame& scan,
                                             const Aabb2D& box,
                                             const PasteParams& params = {});

// Uniform z offset so that min z equals ground.
Instance shift_z_to_ground(const Instance& instance, double ground);

// Ordered flip -> rotate -> shift_y -> shift_x_with_downsample. Exposed so
// callers can inspect the geometry before grounding.
Instance transform_for_paste(const Instance& instance,
                             const DensityProfile& profile, Rng& rng,
                             const PasteParams& params);

struct PasteResult {
  LabeledFrame frame;
  std::string donor_frame;
  std::size_t pasted_instances = 0;
  std::size_t pasted_points = 0;
  std::size_t skipped_instances = 0;
};

// Picks one donor frame at random and pastes its (optionally capped)
// instances into scan. Pasted points are appended with the person class and
// fresh instance ids; existing points are untouched.
PasteResult paste_instances_detailed(const LabeledFrame& scan,
                                     const InstanceRegistry& registry,
                                     const DensityProfile& profile,
                                     const PasteParams& params, Rng& rng);

LabeledFrame paste_instances(const LabeledFrame& scan,
                             const InstanceRegistry& registry,
                             const DensityProfile& profile,
                             const PasteParams& params, Rng& rng);

}  // namespace railaug
