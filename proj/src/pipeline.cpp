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

#include "railaug/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "railaug/error.hpp"
#include "railaug/geometry.hpp"
#include "railaug/pcd_io.hpp"
#include "railaug/random.hpp"
#include "railaug/report_io.hpp"

namespace railaug {
namespace fs = std::filesystem;

namespace {

// Stream salts, so each stage draws from its own sequence.
constexpr std::uint64_t kOnlineSparsify = 0x51;
constexpr std::uint64_t kOnlinePaste = 0x52;
constexpr std::uint64_t kOfflineSparsify = 0x53;
constexpr std::uint64_t kOfflinePaste = 0x54;
constexpr std::uint64_t kInflationPlan = 0x55;

Rng stage_rng(std::uint64_t seed, std::uint64_t salt, const std::string& frame_id,
              std::uint64_t counter) {
  return make_rng(splitmix64(seed ^ splitmix64(salt)), frame_id, counter);
}

template <typename T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> keys,
                    const char* where) {
  std::set<std::string> known(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) {
      throw InvalidInputError(std::string("config: unknown key '") + k + "' in " + where);
    }
  }
}

fs::path rebase(const fs::path& p, const fs::path& base) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

SparsifyParams sparsify_from_json(const nlohmann::json& j) {
  reject_unknown(j, {"d_max", "window", "probability", "track_class"}, "sparsify");
  SparsifyParams p;
  read_if(j, "d_max", p.d_max);
  read_if(j, "window", p.window);
  read_if(j, "probability", p.probability);
  read_if(j, "track_class", p.track_class);
  return p;
}

void read_range(const nlohmann::json& j, const char* key, double& lo, double& hi) {
  if (!j.contains(key)) return;
  const auto& r = j.at(key);
  if (!r.is_array() || r.size() != 2) {
    throw InvalidInputError(std::string("config: '") + key + "' must be [lo, hi]");
  }
  lo = r[0].get<double>();
  hi = r[1].get<double>();
}

PasteParams paste_from_json(const nlohmann::json& j) {
  reject_unknown(j,
                 {"flip_probability", "mirror_axis", "rotation_deg", "y_shift", "count_tolerance",
                  "max_instances", "min_points", "ground_search_radius",
                  "ground_track_neighbors", "max_height_above_track", "probability"},
                 "paste");
  PasteParams p;
  read_if(j, "flip_probability", p.flip_probability);
  if (j.contains("mirror_axis")) {
    const auto axis = j.at("mirror_axis").get<std::string>();
    if (axis == "x") {
      p.mirror_axis = MirrorAxis::kX;
    } else if (axis == "y") {
      p.mirror_axis = MirrorAxis::kY;
    } else {
      throw InvalidInputError("config: mirror_axis must be \"x\" or \"y\"");
    }
  }
  read_range(j, "rotation_deg", p.rotation_min_deg, p.rotation_max_deg);
  read_range(j, "y_shift", p.y_shift_min, p.y_shift_max);
  read_if(j, "count_tolerance", p.count_tolerance);
  read_if(j, "max_instances", p.max_instances);
  read_if(j, "min_points", p.min_points);
  read_if(j, "ground_search_radius", p.ground_search_radius);
  read_if(j, "ground_track_neighbors", p.ground_track_neighbors);
  read_if(j, "max_height_above_track", p.max_height_above_track);
  read_if(j, "probability", p.probability);
  return p;
}

nlohmann::json issues_json(const std::vector<FrameIssue>& issues) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& i : issues) {
    a.push_back({{"frame", i.frame_id}, {"error", i.message}, {"kind", i.io ? "io" : "validation"}});
  }
  return a;
}

FrameIssue issue_from(const std::string& id, const std::exception& e) {
  return {id, e.what(), dynamic_cast<const IoError*>(&e) != nullptr};
}

fs::path manifest_path_in(const fs::path& out_dir) { return out_dir / "manifest.json"; }

void prepare_output(const fs::path& out_dir, bool force) {
  if (fs::exists(manifest_path_in(out_dir)) && !force) {
    throw IoError("output directory '" + out_dir.string() +
                  "' already holds a manifest (use --force to overwrite)");
  }
  std::error_code ec;
  fs::create_directories(out_dir / "frames", ec);
  if (ec) throw IoError("cannot create '" + (out_dir / "frames").string() + "': " + ec.message());
}

// Entry of the input manifest, referenced from the output directory.
ManifestEntry referenced(const DatasetManifest& manifest, const ManifestEntry& e,
                         const fs::path& out_dir) {
  ManifestEntry r = e;
  const fs::path src = fs::absolute(manifest.resolve(e.path)).lexically_normal();
  const fs::path base = fs::absolute(out_dir).lexically_normal();
  r.path = src.lexically_relative(base).generic_string();
  if (r.path.empty()) r.path = src.generic_string();
  return r;
}

struct FrameJob {
  const ManifestEntry* source = nullptr;
  std::string out_id;
  std::uint64_t counter = 0;
};

struct JobOutcome {
  bool ok = false;
  FrameIssue issue;
};

std::vector<JobOutcome> run_jobs(const DatasetManifest& manifest, const std::vector<FrameJob>& jobs,
                                 const fs::path& out_dir, bool offline,
                                 const Augmenter& augmenter) {
  std::vector<JobOutcome> outcomes(jobs.size());
  const auto n = static_cast<std::int64_t>(jobs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    const FrameJob& job = jobs[static_cast<std::size_t>(i)];
    JobOutcome& out = outcomes[static_cast<std::size_t>(i)];
    try {
      const LabeledFrame src = load_manifest_frame(manifest, *job.source);
      LabeledFrame aug = offline ? augmenter.offline(src, job.counter)
                                 : augmenter.online(src, job.counter);
      aug.frame_id = job.out_id;
      validate_frame(aug);
      write_frame(aug, out_dir / "frames" / (job.out_id + ".pcd"), PcdFormat::kBinary);
      out.ok = true;
    } catch (const std::exception& e) {
      out.issue = issue_from(job.source->id, e);
    }
  }
  return outcomes;
}

ManifestEntry augmented_entry(const FrameJob& job, std::uint64_t seed) {
  ManifestEntry e;
  e.id = job.out_id;
  e.split = job.source->split;
  e.path = "frames/" + job.out_id + ".pcd";
  e.sensor = job.source->sensor;
  e.provenance = Provenance{job.source->id, seed, job.counter};
  return e;
}

}  // namespace

// ---------------------------------------------------------------------------
// config

void PipelineConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw InvalidInputError("config: alpha must be a finite value >= 0");
  }
  if (sparsify) sparsify->validate();
  if (paste) paste->validate();
  grid.validate();
  if (!(profile_bin_width > 0.0) || !(profile_max_range > 0.0)) {
    throw InvalidInputError("config: profile bin width and range must be > 0");
  }
}

void PipelineConfig::propagate_seed() {
  if (sparsify) sparsify->seed = seed;
  if (paste) paste->seed = seed;
}

PipelineConfig config_from_json(const nlohmann::json& j) {
  PipelineConfig c;
  try {
    if (!j.is_object()) throw InvalidInputError("config: top level must be an object");
    reject_unknown(j,
                   {"seed", "mode", "alpha", "sparsify", "paste", "range_edges", "grid", "profile",
                    "absent", "manifest", "output_dir", "registry_cache"},
                   "config");
    read_if(j, "seed", c.seed);
    if (j.contains("mode")) {
      const auto mode = j.at("mode").get<std::string>();
      if (mode == "online") {
        c.mode = ApplicationMode::kOnline;
      } else if (mode == "offline") {
        c.mode = ApplicationMode::kOffline;
      } else {
        throw InvalidInputError("config: mode must be \"online\" or \"offline\"");
      }
    }
    read_if(j, "alpha", c.alpha);
    if (j.contains("sparsify") && !j.at("sparsify").is_null()) {
      c.sparsify = sparsify_from_json(j.at("sparsify"));
    }
    if (j.contains("paste") && !j.at("paste").is_null()) c.paste = paste_from_json(j.at("paste"));
    if (j.contains("range_edges")) {
      c.binning = RangeBinning(j.at("range_edges").get<std::vector<double>>());
    }
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      reject_unknown(g, {"x_min", "x_max", "y_min", "y_max", "cell"}, "grid");
      read_if(g, "x_min", c.grid.x_min);
      read_if(g, "x_max", c.grid.x_max);
      read_if(g, "y_min", c.grid.y_min);
      read_if(g, "y_max", c.grid.y_max);
      read_if(g, "cell", c.grid.cell);
    }
    if (j.contains("profile")) {
      const auto& p = j.at("profile");
      reject_unknown(p, {"bin_width", "max_range"}, "profile");
      read_if(p, "bin_width", c.profile_bin_width);
      read_if(p, "max_range", c.profile_max_range);
    }
    if (j.contains("absent")) {
      const auto a = j.at("absent").get<std::string>();
      if (a == "skip") {
        c.absent_mode = AbsentMode::kSkip;
      } else if (a == "strict") {
        c.absent_mode = AbsentMode::kStrict;
      } else {
        throw InvalidInputError("config: absent must be \"skip\" or \"strict\"");
      }
    }
    if (j.contains("manifest")) c.manifest = j.at("manifest").get<std::string>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("registry_cache")) c.registry_cache = j.at("registry_cache").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError(std::string("config: ") + e.what());
  }
  c.propagate_seed();
  c.validate();
  return c;
}

nlohmann::json to_json(const PipelineConfig& c) {
  nlohmann::json j;
  j["seed"] = c.seed;
  j["mode"] = c.mode == ApplicationMode::kOnline ? "online" : "offline";
  j["alpha"] = c.alpha;
  if (c.sparsify) {
    j["sparsify"] = {{"d_max", c.sparsify->d_max},
                     {"window", c.sparsify->window},
                     {"probability", c.sparsify->probability},
                     {"track_class", c.sparsify->track_class}};
  }
  if (c.paste) {
    const auto& p = *c.paste;
    j["paste"] = {{"flip_probability", p.flip_probability},
                  {"mirror_axis", p.mirror_axis == MirrorAxis::kX ? "x" : "y"},
                  {"rotation_deg", {p.rotation_min_deg, p.rotation_max_deg}},
                  {"y_shift", {p.y_shift_min, p.y_shift_max}},
                  {"count_tolerance", p.count_tolerance},
                  {"max_instances", p.max_instances},
                  {"min_points", p.min_points},
                  {"ground_search_radius", p.ground_search_radius},
                  {"ground_track_neighbors", p.ground_track_neighbors},
                  {"max_height_above_track", p.max_height_above_track},
                  {"probability", p.probability}};
  }
  j["range_edges"] = c.binning.edges();
  j["grid"] = {{"x_min", c.grid.x_min},
               {"x_max", c.grid.x_max},
               {"y_min", c.grid.y_min},
               {"y_max", c.grid.y_max},
               {"cell", c.grid.cell}};
  j["profile"] = {{"bin_width", c.profile_bin_width}, {"max_range", c.profile_max_range}};
  j["absent"] = c.absent_mode == AbsentMode::kSkip ? "skip" : "strict";
  if (!c.manifest.empty()) j["manifest"] = c.manifest.generic_string();
  if (!c.output_dir.empty()) j["output_dir"] = c.output_dir.generic_string();
  if (!c.registry_cache.empty()) j["registry_cache"] = c.registry_cache.generic_string();
  return j;
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError("config '" + path.string() + "': " + e.what());
  }
  PipelineConfig c = config_from_json(j);
  // Paths in a config file are relative to the file.
  const fs::path base = path.parent_path();
  c.manifest = rebase(c.manifest, base);
  c.output_dir = rebase(c.output_dir, base);
  c.registry_cache = rebase(c.registry_cache, base);
  return c;
}

// ---------------------------------------------------------------------------
// augmentation

PasteResources build_paste_resources(const DatasetManifest& manifest,
                                     const PipelineConfig& config) {
  const PasteParams params = config.paste.value_or(PasteParams{});
  const fs::path& cache = config.registry_cache;
  if (!cache.empty() && fs::exists(cache / "registry.json") && fs::exists(cache / "profile.json")) {
    PasteResources r{load_registry(cache / "registry.pcd", cache / "registry.json"), {}};
    nlohmann::json pj;
    try {
      pj = nlohmann::json::parse(read_text(cache / "profile.json"));
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInputError("profile json: " + std::string(e.what()));
    }
    r.profile = density_profile_from_json(pj);
    return r;
  }

  const auto train = manifest.split(Split::kTrain);
  if (train.empty()) throw InvalidInputError("paste: manifest has no train frames");
  std::vector<LabeledFrame> frames;
  frames.reserve(train.size());
  for (const auto* e : train) frames.push_back(load_manifest_frame(manifest, *e));
  PasteResources r{build_registry(frames, params.min_points), {}};
  r.profile = build_density_profile(r.registry, config.profile_bin_width, config.profile_max_range);

  if (!cache.empty()) {
    std::error_code ec;
    fs::create_directories(cache, ec);
    if (ec) throw IoError("cannot create '" + cache.string() + "': " + ec.message());
    save_registry(r.registry, cache / "registry.pcd", cache / "registry.json");
    write_text(cache / "profile.json", to_json(r.profile).dump(2) + "\n");
  }
  return r;
}

Augmenter::Augmenter(PipelineConfig config, std::optional<PasteResources> resources)
    : config_(std::move(config)), resources_(std::move(resources)) {
  config_.validate();
  if (config_.paste && !resources_) {
    throw InvalidInputError("paste is configured but no registry/profile was supplied");
  }
}

LabeledFrame Augmenter::online(const LabeledFrame& frame, std::uint64_t epoch) const {
  LabeledFrame out = frame;
  if (config_.sparsify) {
    Rng rng = stage_rng(config_.seed, kOnlineSparsify, frame.frame_id, epoch);
    out = sparsify_frame(out, *config_.sparsify, rng);
  }
  if (config_.paste) {
    Rng rng = stage_rng(config_.seed, kOnlinePaste, frame.frame_id, epoch);
    if (bernoulli(rng, config_.paste->probability)) {
      out = paste_instances(out, resources_->registry, resources_->profile, *config_.paste, rng);
    }
  }
  return out;
}

LabeledFrame Augmenter::offline(const LabeledFrame& frame, std::uint64_t pass) const {
  LabeledFrame out = frame;
  if (config_.sparsify) {
    Rng rng = stage_rng(config_.seed, kOfflineSparsify, frame.frame_id, pass);
    out = sparsify_all_tracks(out, *config_.sparsify, rng);
  }
  if (config_.paste) {
    Rng rng = stage_rng(config_.seed, kOfflinePaste, frame.frame_id, pass);
    out = paste_instances(out, resources_->registry, resources_->profile, *config_.paste, rng);
  }
  return out;
}

LabeledFrame online_augment_hook(const LabeledFrame& frame, const Augmenter& augmenter,
                                 std::uint64_t epoch) {
  return augmenter.online(frame, epoch);
}

int exit_code_for(const std::vector<FrameIssue>& issues) {
  if (issues.empty()) return 0;
  const bool any_io = std::any_of(issues.begin(), issues.end(), [](const auto& i) { return i.io; });
  return any_io ? 2 : 1;
}

LabeledFrame load_manifest_frame(const DatasetManifest& manifest, const ManifestEntry& entry) {
  LabeledFrame f = read_frame(manifest.resolve(entry.path));
  f.frame_id = entry.id;
  if (!entry.sensor.empty()) f.sensor_id = entry.sensor;
  validate_frame(f);
  return f;
}

// ---------------------------------------------------------------------------
// stats

StatsReport compute_stats(const DatasetManifest& manifest, Split split, double bin_width,
                          double max_range) {
  if (!(bin_width > 0.0) || !(max_range > 0.0)) {
    throw InvalidInputError("stats: bin width and range must be > 0");
  }
  const auto entries = manifest.split(split);
  if (entries.empty()) {
    throw InvalidInputError(std::string("stats: split '") + to_string(split) + "' is empty");
  }
  StatsReport r;
  r.class_points.assign(cls::kCount, 0);
  const auto bins = static_cast<std::size_t>(std::ceil(max_range / bin_width - 1e-9));
  for (std::size_t b = 0; b < bins; ++b) {
    RangeBinStats s;
    s.lo = static_cast<double>(b) * bin_width;
    s.hi = std::min(static_cast<double>(b + 1) * bin_width, max_range);
    r.person_bins.push_back(s);
  }

  for (const auto* e : entries) {
    LabeledFrame f;
    try {
      f = load_manifest_frame(manifest, *e);
    } catch (const std::exception& ex) {
      r.issues.push_back(issue_from(e->id, ex));
      continue;
    }
    ++r.frames;
    for (ClassId c : f.labels) {
      if (c >= 0) ++r.class_points[static_cast<std::size_t>(c)];
    }
    for (const auto& inst : extract_instances(f, cls::kPerson)) {
      const double d = planar_distance(centroid(inst));
      const auto b = static_cast<std::size_t>(std::floor(d / bin_width));
      if (d >= max_range || b >= bins) {
        ++r.person_instances_beyond;
        continue;
      }
      ++r.person_bins[b].instances;
      r.person_bins[b].points_per_instance.push_back(inst.size());
    }
  }
  for (auto& b : r.person_bins) {
    std::sort(b.points_per_instance.begin(), b.points_per_instance.end());
  }
  return r;
}

nlohmann::json to_json(const StatsReport& r, const ClassMap& map) {
  nlohmann::json j;
  j["frames"] = r.frames;
  nlohmann::json points = nlohmann::json::object();
  for (std::size_t c = 0; c < r.class_points.size(); ++c) {
    points[map.name_of(static_cast<ClassId>(c))] = r.class_points[c];
  }
  j["class_points"] = points;
  nlohmann::json bins = nlohmann::json::array();
  for (const auto& b : r.person_bins) {
    bins.push_back({{"lo", b.lo},
                    {"hi", b.hi},
                    {"instances", b.instances},
                    {"points_per_instance", b.points_per_instance}});
  }
  j["person_bins"] = bins;
  j["person_instances_beyond"] = r.person_instances_beyond;
  j["issues"] = issues_json(r.issues);
  return j;
}

// ---------------------------------------------------------------------------
// dataset writers

DatasetWriteResult augment_split(const DatasetManifest& manifest, const Augmenter& augmenter,
                                 const fs::path& out_dir, bool force, std::uint64_t epoch) {
  prepare_output(out_dir, force);
  std::vector<FrameJob> jobs;
  for (const auto* e : manifest.split(Split::kTrain)) jobs.push_back({e, e->id, epoch});
  const auto outcomes = run_jobs(manifest, jobs, out_dir, false, augmenter);

  DatasetWriteResult r;
  r.manifest.class_map_ref = manifest.class_map_ref;
  r.manifest.base_dir = out_dir;
  std::size_t next = 0;
  for (const auto& e : manifest.frames) {
    if (e.split != Split::kTrain) {
      r.manifest.frames.push_back(referenced(manifest, e, out_dir));
      continue;
    }
    const auto& outcome = outcomes[next];
    const FrameJob& job = jobs[next++];
    if (!outcome.ok) {
      r.issues.push_back(outcome.issue);
      continue;
    }
    r.manifest.frames.push_back(augmented_entry(job, augmenter.config().seed));
    ++r.augmented_frames;
  }
  r.manifest_path = manifest_path_in(out_dir);
  save_manifest(r.manifest, r.manifest_path);
  return r;
}

std::vector<InflationPick> plan_inflation(std::size_t train_frames, double alpha,
                                          std::uint64_t seed) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw InvalidInputError("inflate: alpha must be a finite value >= 0");
  }
  std::vector<InflationPick> picks;
  if (train_frames == 0) return picks;
  const auto total = static_cast<std::size_t>(std::llround(alpha * static_cast<double>(train_frames)));
  const std::size_t full = total / train_frames;
  const std::size_t rest = total % train_frames;
  for (std::size_t pass = 0; pass < full; ++pass) {
    for (std::size_t i = 0; i < train_frames; ++i) picks.push_back({i, pass});
  }
  if (rest > 0) {
    Rng rng = stage_rng(seed, kInflationPlan, "inflate", full);
    for (std::size_t i : sample_without_replacement(rng, train_frames, rest)) {
      picks.push_back({i, full});
    }
  }
  return picks;
}

DatasetWriteResult inflate_dataset(const DatasetManifest& manifest, const Augmenter& augmenter,
                                   double alpha, const fs::path& out_dir, bool force) {
  const auto train = manifest.split(Split::kTrain);
  const auto picks = plan_inflation(train.size(), alpha, augmenter.config().seed);
  prepare_output(out_dir, force);

  std::set<std::string> taken;
  for (const auto& e : manifest.frames) taken.insert(e.id);
  std::vector<FrameJob> jobs;
  for (const auto& p : picks) {
    FrameJob job{train[p.source], train[p.source]->id + "_aug" + std::to_string(p.pass), p.pass};
    if (!taken.insert(job.out_id).second) {
      throw InvalidInputError("inflate: generated id '" + job.out_id + "' collides with an input frame");
    }
    jobs.push_back(std::move(job));
  }
  const auto outcomes = run_jobs(manifest, jobs, out_dir, true, augmenter);

  DatasetWriteResult r;
  r.manifest.class_map_ref = manifest.class_map_ref;
  r.manifest.base_dir = out_dir;
  for (const auto& e : manifest.frames) r.manifest.frames.push_back(referenced(manifest, e, out_dir));
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!outcomes[i].ok) {
      r.issues.push_back(outcomes[i].issue);
      continue;
    }
    r.manifest.frames.push_back(augmented_entry(jobs[i], augmenter.config().seed));
    ++r.augmented_frames;
  }
  r.manifest_path = manifest_path_in(out_dir);
  save_manifest(r.manifest, r.manifest_path);
  return r;
}

// ---------------------------------------------------------------------------
// evaluation

std::vector<ClassId> read_prediction_labels(const fs::path& pred_dir, const std::string& frame_id) {
  const fs::path label_path = pred_dir / (frame_id + ".label");
  if (fs::exists(label_path)) {
    std::ifstream in(label_path);
    if (!in) throw IoError("cannot open '" + label_path.string() + "'");
    std::vector<ClassId> labels;
    long long v = 0;
    while (in >> v) labels.push_back(static_cast<ClassId>(v));
    if (!in.eof()) throw IoError("malformed label file '" + label_path.string() + "'");
    return labels;
  }
  const fs::path pcd_path = pred_dir / (frame_id + ".pcd");
  if (fs::exists(pcd_path)) return read_frame(pcd_path).labels;
  throw IoError("missing prediction for frame '" + frame_id + "' in '" + pred_dir.string() + "'");
}

EvaluationResult evaluate_dataset(const DatasetManifest& manifest, const fs::path& pred_dir,
                                  const PipelineConfig& config,
                                  std::span<const ClassId> grid_classes, Split split) {
  config.grid.validate();
  const auto entries = manifest.split(split);
  EvaluationResult result{0, ConfusionMatrix{}, RangeConfusion{config.binning}, {}, {}};
  for (ClassId c : grid_classes) result.grids.emplace_back(config.grid, c);

  std::vector<std::optional<FrameIssue>> issues(entries.size());
  const auto n = static_cast<std::int64_t>(entries.size());
#pragma omp parallel
  {
    EvaluationResult part{0, ConfusionMatrix{}, RangeConfusion{config.binning}, result.grids, {}};
#pragma omp for schedule(dynamic)
    for (std::int64_t i = 0; i < n; ++i) {
      const ManifestEntry& e = *entries[static_cast<std::size_t>(i)];
      try {
        const LabeledFrame gt = load_manifest_frame(manifest, e);
        const std::vector<ClassId> pred = read_prediction_labels(pred_dir, e.id);
        if (pred.size() != gt.size()) {
          throw InvalidInputError("prediction for '" + e.id + "' has " +
                                  std::to_string(pred.size()) + " labels, expected " +
                                  std::to_string(gt.size()));
        }
        // Validate everything before touching the tallies.
        ConfusionMatrix cm;
        accumulate(cm, gt.labels, pred);
        part.confusion.merge(cm);
        part.range_confusion.add(gt.points, gt.labels, pred);
        for (auto& g : part.grids) g.add(gt.points, gt.labels, pred);
        ++part.frames;
      } catch (const std::exception& ex) {
        issues[static_cast<std::size_t>(i)] = issue_from(e.id, ex);
      }
    }
#pragma omp critical(railaug_evaluate_merge)
    {
      result.frames += part.frames;
      result.confusion.merge(part.confusion);
      result.range_confusion.merge(part.range_confusion);
      for (std::size_t g = 0; g < result.grids.size(); ++g) result.grids[g].merge(part.grids[g]);
    }
  }
  for (auto& i : issues) {
    if (i) result.issues.push_back(std::move(*i));
  }
  return result;
}

void write_evaluation(const EvaluationResult& result, const PipelineConfig& config,
                      const ClassMap& map, std::span<const ClassId> riou_classes,
                      const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());

  const auto ious = iou_per_class(result.confusion);
  const double m = miou(ious, config.absent_mode);
  const RIoUReport riou = range_iou_report(result.range_confusion, riou_classes, config.absent_mode);
  write_text(out_dir / "iou.csv", iou_table_csv(ious, m, map));
  write_text(out_dir / "riou.csv", riou_table_csv(riou, map));

  nlohmann::json report;
  report["frames"] = result.frames;
  report["segmentation"] = iou_json(ious, m, map);
  report["range"] = riou_json(riou, map);
  report["issues"] = issues_json(result.issues);
  nlohmann::json grids = nlohmann::json::array();
  for (const auto& g : result.grids) {
    const std::string stem = "recall_" + map.name_of(g.class_id());
    write_text(out_dir / (stem + ".csv"), recall_grid_csv(g));
    write_text(out_dir / (stem + ".pgm"), recall_grid_pgm(g));
    grids.push_back(stem);
  }
  report["recall_grids"] = grids;
  write_text(out_dir / "report.json", report.dump(2) + "\n");
}

RecallDiff write_recall_diff(const fs::path& grid_a, const fs::path& grid_b,
                             const fs::path& out_dir) {
  const RecallDiff diff = recall_diff(load_recall_grid(grid_a), load_recall_grid(grid_b));
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());
  write_text(out_dir / "recall_diff.csv", recall_diff_csv(diff));
  write_text(out_dir / "recall_diff.pgm", recall_diff_pgm(diff));
  return diff;
}

}  // namespace railaug
