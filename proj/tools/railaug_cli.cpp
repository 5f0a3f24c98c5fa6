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

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "railaug/class_map.hpp"
#include "railaug/error.hpp"
#include "railaug/manifest.hpp"
#include "railaug/paste.hpp"
#include "railaug/pipeline.hpp"
#include "railaug/report_io.hpp"

namespace fs = std::filesystem;
using namespace railaug;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> prob;
  std::optional<double> alpha;
  std::optional<double> dmax;
  std::optional<double> window;
  std::string bins;
  std::vector<std::string> classes;
  std::string in;
  std::string pred;
  std::string out;
  bool force = false;
  std::string mode = "online";
  std::vector<std::string> grids;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "JSON config file; flags override it");
  cmd->add_option("--seed", o.seed, "Random seed");
}

std::vector<double> parse_edges(const std::string& text) {
  std::vector<double> edges;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      edges.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::logic_error&) {
      throw InvalidInputError("--bins: '" + tok + "' is not a number");
    }
  }
  return edges;
}

PipelineConfig resolve_config(const Options& o) {
  PipelineConfig c = o.config.empty() ? PipelineConfig{} : load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.alpha) c.alpha = *o.alpha;
  if (!o.bins.empty()) c.binning = RangeBinning(parse_edges(o.bins));
  if (!o.in.empty()) c.manifest = o.in;
  if (!o.out.empty()) c.output_dir = o.out;
  return c;
}

void require(const fs::path& p, const char* flag) {
  if (p.empty()) throw InvalidInputError(std::string("missing required ") + flag);
}

ClassMap class_map_for(const DatasetManifest& m) {
  if (m.class_map_ref.empty()) return osdar23_class_map();
  return load_class_map(m.resolve(m.class_map_ref).string());
}

std::vector<ClassId> resolve_classes(const std::vector<std::string>& names, const ClassMap& map,
                                     ClassId fallback) {
  if (names.empty()) return {fallback};
  std::vector<ClassId> ids;
  for (const auto& n : names) ids.push_back(map.resolve(n));
  return ids;
}

void report_issues(const std::vector<FrameIssue>& issues) {
  for (const auto& i : issues) {
    std::cerr << "frame " << i.frame_id << ": " << i.message << "\n";
  }
}

int finish_write(const DatasetWriteResult& r) {
  report_issues(r.issues);
  std::cout << "wrote " << r.augmented_frames << " augmented frames, manifest "
            << r.manifest_path.string() << " (" << r.manifest.frames.size() << " frames)\n";
  return exit_code_for(r.issues);
}

int run_stats(const Options& o) {
  PipelineConfig c = resolve_config(o);
  require(c.manifest, "--in");
  const DatasetManifest m = load_manifest(c.manifest);
  const StatsReport r = compute_stats(m, Split::kTrain, c.profile_bin_width, c.profile_max_range);
  const std::string text = to_json(r, class_map_for(m)).dump(2) + "\n";
  if (o.out.empty()) {
    std::cout << text;
  } else {
    write_text(o.out, text);
  }
  report_issues(r.issues);
  return exit_code_for(r.issues);
}

int run_sparsify(const Options& o) {
  PipelineConfig c = resolve_config(o);
  require(c.manifest, "--in");
  require(c.output_dir, "--out");
  SparsifyParams p = c.sparsify.value_or(SparsifyParams{});
  if (o.dmax) p.d_max = *o.dmax;
  if (o.window) p.window = *o.window;
  if (o.prob) p.probability = *o.prob;
  c.sparsify = p;
  c.paste.reset();
  c.mode = ApplicationMode::kOnline;
  c.propagate_seed();
  const DatasetManifest m = load_manifest(c.manifest);
  const Augmenter aug(c);
  return finish_write(augment_split(m, aug, c.output_dir, o.force));
}

int run_paste(const Options& o) {
  PipelineConfig c = resolve_config(o);
  require(c.manifest, "--in");
  require(c.output_dir, "--out");
  PasteParams p = c.paste.value_or(PasteParams{});
  if (o.mode == "online") {
    if (o.alpha) throw InvalidInputError("--alpha applies to --mode offline only");
    if (o.prob) p.probability = *o.prob;
    c.mode = ApplicationMode::kOnline;
  } else if (o.mode == "offline") {
    if (o.prob) throw InvalidInputError("--prob applies to --mode online only");
    c.mode = ApplicationMode::kOffline;
  } else {
    throw InvalidInputError("--mode must be online or offline");
  }
  c.paste = p;
  c.sparsify.reset();
  c.propagate_seed();
  const DatasetManifest m = load_manifest(c.manifest);
  const Augmenter aug(c, build_paste_resources(m, c));
  if (c.mode == ApplicationMode::kOnline) {
    return finish_write(augment_split(m, aug, c.output_dir, o.force));
  }
  return finish_write(inflate_dataset(m, aug, c.alpha, c.output_dir, o.force));
}

int run_inflate(const Options& o) {
  PipelineConfig c = resolve_config(o);
  require(c.manifest, "--in");
  require(c.output_dir, "--out");
  if (c.sparsify) {
    if (o.dmax) c.sparsify->d_max = *o.dmax;
    if (o.window) c.sparsify->window = *o.window;
  }
  if (!c.sparsify && !c.paste) {
    throw InvalidInputError("inflate: the config enables neither sparsify nor paste");
  }
  c.mode = ApplicationMode::kOffline;
  c.propagate_seed();
  const DatasetManifest m = load_manifest(c.manifest);
  std::optional<PasteResources> res;
  if (c.paste) res = build_paste_resources(m, c);
  const Augmenter aug(c, std::move(res));
  return finish_write(inflate_dataset(m, aug, c.alpha, c.output_dir, o.force));
}

int run_evaluate(const Options& o, bool grids_only) {
  PipelineConfig c = resolve_config(o);
  require(c.manifest, "--in");
  require(o.pred, "--pred");
  require(c.output_dir, "--out");
  const DatasetManifest m = load_manifest(c.manifest);
  const ClassMap map = class_map_for(m);
  const std::vector<ClassId> grid_classes = resolve_classes(o.classes, map, cls::kTrack);
  const EvaluationResult r = evaluate_dataset(m, o.pred, c, grid_classes);
  report_issues(r.issues);
  if (r.frames == 0) {
    std::cerr << "no frame could be evaluated\n";
    return r.issues.empty() ? 1 : exit_code_for(r.issues);
  }
  if (grids_only) {
    std::error_code ec;
    fs::create_directories(c.output_dir, ec);
    for (const auto& g : r.grids) {
      const std::string stem = "recall_" + map.name_of(g.class_id());
      write_text(c.output_dir / (stem + ".csv"), recall_grid_csv(g));
      write_text(c.output_dir / (stem + ".pgm"), recall_grid_pgm(g));
    }
  } else {
    std::vector<ClassId> all(static_cast<std::size_t>(map.num_classes()));
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<ClassId>(i);
    write_evaluation(r, c, map, all, c.output_dir);
  }
  std::cout << "evaluated " << r.frames << " frames into " << c.output_dir.string() << "\n";
  return exit_code_for(r.issues);
}

int run_recall_diff(const Options& o) {
  require(o.out, "--out");
  if (o.grids.size() != 2) throw InvalidInputError("recall-diff needs two grid csv files");
  write_recall_diff(o.grids[0], o.grids[1], o.out);
  std::cout << "wrote recall_diff.csv and recall_diff.pgm to " << o.out << "\n";
  return 0;
}

int run_profile(const Options& o) {
  PipelineConfig c = resolve_config(o);
  require(c.manifest, "--in");
  require(c.output_dir, "--out");
  if (!c.paste) c.paste = PasteParams{};
  // Always rebuild here; the output directory becomes a registry cache.
  c.registry_cache.clear();
  const DatasetManifest m = load_manifest(c.manifest);
  const PasteResources r = build_paste_resources(m, c);
  std::error_code ec;
  fs::create_directories(c.output_dir, ec);
  if (ec) throw IoError("cannot create '" + c.output_dir.string() + "'");
  save_registry(r.registry, c.output_dir / "registry.pcd", c.output_dir / "registry.json");
  write_text(c.output_dir / "profile.json", to_json(r.profile).dump(2) + "\n");
  std::cout << "registry: " << r.registry.size() << " instances from "
            << r.registry.donor_frames().size() << " frames\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"railaug: LiDAR augmentation and range-aware evaluation"};
  app.require_subcommand(1);
  Options o;

  auto* stats = app.add_subcommand("stats", "Per-class counts and person instances per range bin");
  add_common(stats, o);
  stats->add_option("--in", o.in, "Dataset manifest");
  stats->add_option("--out", o.out, "Write the JSON report here instead of stdout");

  auto* sparsify = app.add_subcommand("sparsify", "Track sparsification over the train split");
  add_common(sparsify, o);
  sparsify->add_option("--dmax", o.dmax, "Upper end of the density selection window (m)");
  sparsify->add_option("--window", o.window, "Window width (m)");
  sparsify->add_option("--prob", o.prob, "Per-frame probability");
  sparsify->add_option("--in", o.in, "Dataset manifest");
  sparsify->add_option("--out", o.out, "Output directory");
  sparsify->add_flag("--force", o.force, "Overwrite an existing output manifest");

  auto* paste = app.add_subcommand("paste", "Person instance pasting");
  add_common(paste, o);
  paste->add_option("--mode", o.mode, "online or offline")->check(CLI::IsMember({"online", "offline"}));
  paste->add_option("--prob", o.prob, "Per-frame probability (online)");
  paste->add_option("--alpha", o.alpha, "Inflation ratio (offline)");
  paste->add_option("--in", o.in, "Dataset manifest");
  paste->add_option("--out", o.out, "Output directory");
  paste->add_flag("--force", o.force, "Overwrite an existing output manifest");

  auto* inflate = app.add_subcommand("inflate", "Offline inflation with the configured augmentations");
  add_common(inflate, o);
  inflate->add_option("--alpha", o.alpha, "Inflation ratio");
  inflate->add_option("--dmax", o.dmax, "Sparsify d_max override (m)");
  inflate->add_option("--window", o.window, "Sparsify window override (m)");
  inflate->add_option("--in", o.in, "Dataset manifest");
  inflate->add_option("--out", o.out, "Output directory");
  inflate->add_flag("--force", o.force, "Overwrite an existing output manifest");

  auto* evaluate = app.add_subcommand("evaluate", "IoU, range IoU and recall grids on the val split");
  add_common(evaluate, o);
  evaluate->add_option("--in", o.in, "Ground-truth manifest");
  evaluate->add_option("--pred", o.pred, "Prediction directory");
  evaluate->add_option("--out", o.out, "Report directory");
  evaluate->add_option("--bins", o.bins, "Range bin edges, e.g. 0,20,40,60,80,100");
  evaluate->add_option("--class", o.classes, "Recall grid class (repeatable)");

  auto* recall_map = app.add_subcommand("recall-map", "Recall grids only");
  add_common(recall_map, o);
  recall_map->add_option("--in", o.in, "Ground-truth manifest");
  recall_map->add_option("--pred", o.pred, "Prediction directory");
  recall_map->add_option("--out", o.out, "Output directory");
  recall_map->add_option("--class", o.classes, "Grid class (repeatable)");

  auto* recall_diff = app.add_subcommand("recall-diff", "Cellwise difference of two recall grids");
  recall_diff->add_option("grids", o.grids, "grid_a.csv grid_b.csv")->expected(2);
  recall_diff->add_option("--out", o.out, "Output directory");

  auto* profile = app.add_subcommand("profile", "Build the person registry and density profile");
  add_common(profile, o);
  profile->add_option("--in", o.in, "Dataset manifest");
  profile->add_option("--out", o.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (stats->parsed()) return run_stats(o);
    if (sparsify->parsed()) return run_sparsify(o);
    if (paste->parsed()) return run_paste(o);
    if (inflate->parsed()) return run_inflate(o);
    if (evaluate->parsed()) return run_evaluate(o, false);
    if (recall_map->parsed()) return run_evaluate(o, true);
    if (recall_diff->parsed()) return run_recall_diff(o);
    if (profile->parsed()) return run_profile(o);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
