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

#include "railaug/random.hpp"
#include "railaug/types.hpp"

namespace railaug {

struct SparsifyParams {
  double d_max = 80.0;     // upper end of the density selection window, m
  double window = 10.0;    // window width W, m
  double probability = 1.0;  // per-frame application probability
  std::uint64_t seed = 0;
  ClassId track_class = cls::kTrack;

  // Throws InvalidInputError unless W > 0, d_max > 0 and p in [0, 1].
  void validate() const;
};

// Points with planar distance in [lo, hi).
std::size_t window_count(const Instance& instance, double lo, double hi);
std::size_t window_count(std::span<const double> distances, double lo, double hi);

// Cap resolved for one instance: d_eff = min(d_max, max distance) and
// c_max = count in [d_eff - W, d_eff).
struct SparsifyWindow {
  double d_eff = 0.0;
  std::size_t c_max = 0;
};
SparsifyWindow resolve_window(std::span<const double> distances,
                              const SparsifyParams& params);

// Walks windows [d_eff - (k+1)W, d_eff - kW) for k = 1, 2, ... down to 0
// (the last one clipped at 0) and drops random points from any window
// holding more than c_max. Returns a keep mask aligned with distances.
std::vector<bool> sparsify_keep_mask(std::span<const double> distances,
                                     const SparsifyParams& params, Rng& rng);

// Empty instances are returned unchanged.
Instance sparsify_instance(const Instance& instance,
                           const SparsifyParams& params, Rng& rng);

// One Bernoulli(p) draw for the frame; on success every track instance is
// sparsified in ascending instance-id order. Other points are untouched and
// keep their relative order.
LabeledFrame sparsify_frame(const LabeledFrame& frame,
                            const SparsifyParams& params, Rng& rng);

// Unconditional variant used by offline inflation.
LabeledFrame sparsify_all_tracks(const LabeledFrame& frame,
                                 const SparsifyParams& params, Rng& rng);

}  // namespace railaug
