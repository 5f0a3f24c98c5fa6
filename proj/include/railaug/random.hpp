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

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace railaug {

// mt19937_64 output is fully specified by the standard; the helpers below
// avoid std distributions, whose output differs between standard libraries.
using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t fnv1a64(std::string_view s) noexcept;

// Independent per-frame stream seed from (seed, frame id, counter). The
// counter is the epoch for online use and the pass index for inflation.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view frame_id,
                          std::uint64_t counter = 0) noexcept;
Rng make_rng(std::uint64_t seed, std::string_view frame_id,
             std::uint64_t counter = 0);

// [0, 1) with 53 random bits.
double uniform01(Rng& rng);
double uniform_real(Rng& rng, double lo, double hi);
// Unbiased integer in [0, n). n must be > 0.
std::size_t uniform_index(Rng& rng, std::size_t n);
// Unbiased integer in [lo, hi], lo <= hi.
std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi);
bool bernoulli(Rng& rng, double p);

// k distinct indices from [0, n), ascending. k is clamped to n.
std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t n,
                                                    std::size_t k);

// Index drawn proportionally to non-negative weights; weights must not all
// be zero.
std::size_t weighted_index(Rng& rng, std::span<const double> weights);

}  // namespace railaug
