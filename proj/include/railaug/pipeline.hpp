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
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "railaug/class_map.hpp"
#include "railaug/manifest.hpp"
#include "railaug/metrics.hpp"
#include "railaug/paste.hpp"
#include "railaug/sparsify.hpp"

namespace railaug {

enum class ApplicationMode { kOnline, kOffline };

struct PipelineConfig {
  std::uint64_t seed = 0;
  std::optional<SparsifyParams> sparsify;
  std::optional<PasteParams> paste;
  ApplicationMode mode = ApplicationMode::kOnline;
  double alpha = 0.0;
  RangeBinning binning;
  GridSpec grid;
  double profile_bin_width = 20.0;
  double profile_max_range = 100.0;
  AbsentMode absent_mode = AbsentMode::kSkip;
  std::filesystem::path manifest;
  std::filesystem::path output_dir;
  std::filesystem::path registry_cache;

  // Throws InvalidInputError: alpha >= 0, probabilities in [0, 1], params
  // of each configured augmentation valid.
  void validate() const;
  // Pushes the top-level seed into the augmentation params.
  void propagate_seed();
};

PipelineConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PipelineConfig& config);
PipelineConfig load_config(const std::filesystem::path& path);

struct PasteResources {
  InstanceRegistry registry;
  DensityProfile profile;
};

// Registry and profile from the train split of a manifest. With a
// registry_cache directory, a cached registry.pcd / registry.json /
// profile.json is reused when present and written when absent.
PasteResources build_paste_resources(const DatasetManifest& manifest,
                                     const PipelineConfig& config);

// Immutable after construction; safe to share between threads.
class Augmenter {
 public:
  // Throws InvalidInputError if paste is configured without resources.
  Augmenter(PipelineConfig config, std::optional<PasteResources> resources = {});

  const PipelineConfig& config() const { return config_; }
  const std::optional<PasteResources>& resources() const { return resources_; }

  // Sparsify (p = sparsify.probability) then paste (p = paste.probability),
  // with independent draws from the (seed, frame id, epoch) stream.
  LabeledFrame online(const LabeledFrame& frame, std::uint64_t epoch) const;

  // Applies every configured augmentation unconditionally, from the
  // (seed, frame id, pass) offline stream.
  LabeledFrame offline(const LabeledFrame& frame, std::uint64_t pass) const;

 private:
  PipelineConfig config_;
  std::optional<PasteResources> resources_;
};

LabeledFrame online_augment_hook(const LabeledFrame& frame, const Augmenter& augmenter,
                                 std::uint64_t epoch);

// Per-frame problems recorded by batch commands. Batch commands keep going
// and report these at the end.
struct FrameIssue {
  std::string frame_id;
  std::string message;
  bool io = false;  // I/O vs validation
};

// 0 success, 1 validation error, 2 I/O error.
int exit_code_for(const std::vector<FrameIssue>& issues);

// Reads a manifest frame, applying the manifest's id and sensor.
LabeledFrame load_manifest_frame(const DatasetManifest& manifest,
                                 const ManifestEntry& entry);

// ---------------------------------------------------------------------------
// stats

struct RangeBinStats {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t instances = 0;
  std::vector<std::size_t> points_per_instance;  // sorted
};

struct StatsReport {
  std::size_t frames = 0;
  std::vector<std::uint64_t> class_points;  // by class id
  std::vector<RangeBinStats> person_bins;
  std::size_t person_instances_beyond = 0;  // centroid past the last bin
  std::vector<FrameIssue> issues;
};

// Statistics over one split (train by default). Throws InvalidInputError
// when the split is empty.
StatsReport compute_stats(const DatasetManifest& manifest,
                          Split split = Split::kTrain, double bin_width = 20.0,
                          double max_range = 100.0);
nlohmann::json to_json(const StatsReport& report, const ClassMap& map);

// ---------------------------------------------------------------------------
// sparsify / paste / inflate

struct DatasetWriteResult {
  DatasetManifest manifest;
  std::filesystem::path manifest_path;
  std::size_t augmented_frames = 0;
  std::vector<FrameIssue> issues;
};

// Online-style single pass over the train split: each train frame goes
// through Augmenter::online(frame, epoch) and is written to out_dir/frames;
// other splits are referenced unchanged.
DatasetWriteResult augment_split(const DatasetManifest& manifest,
                                 const Augmenter& augmenter,
                                 const std::filesystem::path& out_dir,
                                 bool force, std::uint64_t epoch = 0);

// Offline inflation: round(alpha * |train|) augmented frames are added.
// Source frames are drawn without replacement within each pass; alpha = 1
// uses every frame exactly once. Throws IoError if out_dir already holds a
// manifest and force is false.
DatasetWriteResult inflate_dataset(const DatasetManifest& manifest,
                                   const Augmenter& augmenter, double alpha,
                                   const std::filesystem::path& out_dir,
                                   bool force);

// Source frame indices and pass numbers selected for inflation.
struct InflationPick {
  std::size_t source = 0;
  std::uint64_t pass = 0;
};
std::vector<InflationPick> plan_inflation(std::size_t train_frames, double alpha,
                                          std::uint64_t seed);

// ---------------------------------------------------------------------------
// evaluate

struct EvaluationResult {
  std::size_t frames = 0;
  ConfusionMatrix confusion;
  RangeConfusion range_confusion;
  std::vector<RecallGrid> grids;
  std::vector<FrameIssue> issues;
};

// One prediction per gt frame: pred_dir/<id>.pcd (label column) or
// pred_dir/<id>.label (one integer per line). Frames with a missing or
// misaligned prediction are listed in issues and left out.
EvaluationResult evaluate_dataset(const DatasetManifest& manifest,
                                  const std::filesystem::path& pred_dir,
                                  const PipelineConfig& config,
                                  std::span<const ClassId> grid_classes,
                                  Split split = Split::kVal);

// iou.csv, riou.csv, report.json and recall_<class>.{csv,pgm}.
void write_evaluation(const EvaluationResult& result, const PipelineConfig& config,
                      const ClassMap& map, std::span<const ClassId> riou_classes,
                      const std::filesystem::path& out_dir);

std::vector<ClassId> read_prediction_labels(const std::filesystem::path& pred_dir,
                                            const std::string& frame_id);

// recall_diff.csv and recall_diff.pgm under out_dir.
RecallDiff write_recall_diff(const std::filesystem::path& grid_a,
                             const std::filesystem::path& grid_b,
                             const std::filesystem::path& out_dir);

}  // namespace railaug
