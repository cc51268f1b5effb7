// Copyright 2026 The coughscreen Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "commands.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>

#include "coughscreen/backend.hpp"
#include "coughscreen/dataset.hpp"
#include "coughscreen/embedding.hpp"
#include "coughscreen/error.hpp"
#include "coughscreen/feature_prep.hpp"
#include "coughscreen/io.hpp"
#include "coughscreen/metrics.hpp"

namespace coughscreen::cli {
namespace fs = std::filesystem;
using nlohmann::json;

void Logger::write(std::string_view level, std::string_view event, json fields) {
  json line = {{"level", level}, {"cmd", command_}, {"event", event}};
  for (auto it = fields.begin(); it != fields.end(); ++it) line[it.key()] = it.value();
  sink_ << line.dump() << '\n';
  sink_.flush();
}

namespace {

json common_json(const Common& c) {
  return {{"seed", c.seed}, {"jobs", c.jobs}, {"out", c.out.generic_string()}};
}

json params_json(const ForestParams& p) {
  return {{"n_estimators", p.n_estimators},
          {"criterion", to_string(p.criterion)},
          {"max_features", p.max_features},
          {"min_samples_leaf", p.min_samples_leaf},
          {"min_samples_split", p.min_samples_split},
          {"bootstrap", p.bootstrap},
          {"split_mode", to_string(p.split_mode)}};
}

json genome_json(const Genome& g) {
  json j = params_json(g.to_params(0));
  j["l2_normalize"] = g.l2_normalize;
  return j;
}

void write_config(const Common& c, std::string_view command, json options) {
  json doc = {{"command", command}, {"common", common_json(c)}, {"options", std::move(options)}};
  write_file_text(c.out / "config.json", doc.dump(2) + "\n");
}

void check_id_is_filename(const std::string& id) {
  if (id.empty() || id == "." || id == ".." ||
      id.find_first_of("/\\") != std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument,
                "recording id '" + id + "' cannot be used as a file name");
  }
}

Dataset load_dev(const fs::path& manifest) {
  Dataset d = load_dataset(manifest);
  d.validate();
  return d;
}

std::vector<FoldSplit> load_checked_splits(const Dataset& dev, const fs::path& dir,
                                           Logger& log) {
  std::vector<FoldSplit> splits = load_fold_splits(dir);
  for (const auto& w : validate_splits(dev, splits)) log.warn("split_warning", {{"message", w}});
  return splits;
}

fs::path fold_model_file(const fs::path& dir, int k) {
  return dir / ("fold_" + std::to_string(k) + ".json");
}

struct AudioEntry {
  std::string id;
  Label label = Label::kUnknown;
  fs::path audio;
};

std::vector<AudioEntry> list_audio(const fs::path& input) {
  std::vector<AudioEntry> entries;
  if (fs::is_directory(input)) {
    for (const auto& de : fs::directory_iterator(input)) {
      if (!de.is_regular_file()) continue;
      std::string ext = de.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(),
                     [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
      if (ext != ".flac" && ext != ".wav") continue;
      entries.push_back({de.path().stem().string(), Label::kUnknown, de.path()});
    }
    std::sort(entries.begin(), entries.end(),
              [](const AudioEntry& a, const AudioEntry& b) { return a.id < b.id; });
    if (entries.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "no .flac or .wav files in " + input.generic_string());
    }
    return entries;
  }
  json doc;
  try {
    doc = json::parse(read_file_text(input));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, "audio manifest: " + std::string(e.what()));
  }
  if (!doc.is_array()) throw Error(ErrorCode::kInvalidArgument, "audio manifest must be an array");
  const fs::path base = input.parent_path();
  for (const auto& item : doc) {
    if (!item.is_object() || !item.contains("id") || !item["id"].is_string() ||
        !item.contains("audio") || !item["audio"].is_string()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "audio manifest entries need string 'id' and 'audio'");
    }
    AudioEntry e{item["id"].get<std::string>(), Label::kUnknown, item["audio"].get<std::string>()};
    if (e.audio.is_relative()) e.audio = base / e.audio;
    if (item.contains("label") && !item["label"].is_null()) {
      const auto& l = item["label"];
      if (!l.is_number_integer() || (l.get<int>() != 0 && l.get<int>() != 1)) {
        throw Error(ErrorCode::kInvalidArgument, "label of '" + e.id + "' must be 0, 1 or null");
      }
      e.label = l.get<int>() == 1 ? Label::kPositive : Label::kNegative;
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace

void cmd_extract(const ExtractArgs& a, std::ostream& out, Logger& log) {
  const std::vector<AudioEntry> entries = list_audio(a.input);
  std::map<std::string, int> seen;
  for (const auto& e : entries) {
    check_id_is_filename(e.id);
    if (seen[e.id]++ > 0) throw Error(ErrorCode::kInvalidArgument, "duplicate id '" + e.id + "'");
  }

  const std::vector<BackendSpec> specs = load_backend_manifest(a.backends);
  std::vector<std::unique_ptr<EmbeddingBackend>> backends;
  bool needs_audio = false;
  json layout = json::array();
  std::size_t offset = 0;
  for (const auto& spec : specs) {
    backends.push_back(make_backend(spec));
    needs_audio = needs_audio || backends.back()->consumes_audio();
    layout.push_back({{"id", spec.info.id}, {"output_dim", spec.info.output_dim}, {"offset", offset}});
    offset += spec.info.output_dim;
  }
  log.info("backends_ready", {{"count", backends.size()}, {"feature_dim", offset},
                              {"decodes_audio", needs_audio}});

  parallel_for(entries.size(), a.common.jobs, [&](std::size_t i) {
    const AudioEntry& e = entries[i];
    try {
      if (!fs::is_regular_file(e.audio)) {
        throw Error(ErrorCode::kUnreadableFile, "audio file not found: " + e.audio.generic_string());
      }
      const AudioClip clip = needs_audio ? decode_audio(e.audio) : AudioClip{};
      const FeatureVector fv = extract_features(backends, clip, e.id);
      Matrix<float> row(1, fv.values.size());
      for (std::size_t c = 0; c < fv.values.size(); ++c) row(0, c) = static_cast<float>(fv.values[c]);
      write_emb1(a.common.out / "features" / (e.id + ".emb"), row);
    } catch (const Error& err) {
      throw Error(err.code(), "recording '" + e.id + "': " + err.what());
    }
  });

  std::vector<ManifestEntry> manifest;
  for (const auto& e : entries) {
    manifest.push_back({e.id, e.label, fs::path("features") / (e.id + ".emb")});
  }
  write_file_text(a.common.out / "manifest.json", dataset_manifest_json(manifest));
  write_file_text(a.common.out / "feature_layout.json",
                  json{{"feature_dim", offset}, {"backends", layout}}.dump(2) + "\n");
  write_config(a.common, "extract",
               {{"input", a.input.generic_string()}, {"backends", a.backends.generic_string()}});
  log.info("extracted", {{"recordings", entries.size()}});
  out << "extracted " << entries.size() << " recordings (" << offset << " dims)\n";
}

void cmd_synth(const SynthArgs& a, std::ostream& out, Logger& log) {
  SyntheticConfig cfg = a.config;
  cfg.seed = a.common.seed;
  const SyntheticData synth = make_synthetic(cfg);
  std::vector<ManifestEntry> manifest;
  for (std::size_t r = 0; r < synth.data.size(); ++r) {
    const auto row = synth.data.features.row(r);
    manifest.push_back({synth.data.ids[r], synth.data.labels[r],
                        std::vector<double>(row.begin(), row.end())});
  }
  write_file_text(a.common.out / "manifest.json", dataset_manifest_json(manifest));
  write_fold_splits(a.common.out / "folds", synth.splits);
  write_config(a.common, "synth",
               {{"n", cfg.n}, {"dim", cfg.dim}, {"imbalance", cfg.imbalance},
                {"separation", cfg.separation}, {"folds", cfg.folds}});
  log.info("synthesized", {{"rows", synth.data.size()},
                           {"positives", synth.data.count_positive()},
                           {"folds", synth.splits.size()}});
  out << "wrote " << synth.data.size() << " rows (" << synth.data.count_positive()
      << " positive) and " << synth.splits.size() << " folds\n";
}

void cmd_train(const TrainArgs& a, std::ostream& out, Logger& log) {
  FoldOptions options;
  options.params = a.params;
  options.params.seed = a.common.seed;
  options.params.validate();
  options.l2_normalize = a.l2_normalize;
  options.scaler_scope = parse_scaler_scope(a.scaler_scope);
  options.jobs = a.common.jobs;

  const Dataset dev = load_dev(a.manifest);
  const std::vector<FoldSplit> splits = load_checked_splits(dev, a.folds, log);
  out << parameter_block(options.params);

  FoldOptions inner = options;
  if (splits.size() > 1 && options.jobs != 1) inner.jobs = 1;
  const fs::path model_dir = a.common.out / "models";
  parallel_for(splits.size(), options.jobs, [&](std::size_t i) {
    const FoldModel fm = train_fold(dev, splits[i], inner);
    save_forest(fold_model_file(model_dir, fm.fold_index), fm.model);
  });
  for (const auto& s : splits) {
    log.info("fold_trained", {{"fold", s.fold_index}, {"train", s.train_ids.size()},
                              {"model", fold_model_file(model_dir, s.fold_index).generic_string()}});
  }
  write_config(a.common, "train",
               {{"manifest", a.manifest.generic_string()},
                {"folds", a.folds.generic_string()},
                {"params", params_json(options.params)},
                {"l2_normalize", a.l2_normalize},
                {"scaler_scope", to_string(options.scaler_scope)}});
}

void cmd_eval(const EvalArgs& a, std::ostream& out, Logger& log) {
  const Dataset dev = load_dev(a.manifest);
  const std::vector<FoldSplit> splits = load_checked_splits(dev, a.folds, log);

  std::vector<FoldResult> results;
  std::vector<Forest> models;
  for (const auto& split : splits) {
    const fs::path file = fold_model_file(a.models, split.fold_index);
    Forest model = read_forest(file);
    FoldResult r = evaluate_fold(dev, split, model, a.target_sensitivity);
    r.model_path = fs::relative(file, a.common.out).generic_string();
    if (r.model_path.empty()) r.model_path = fs::absolute(file).generic_string();

    const std::string k = std::to_string(split.fold_index);
    write_file_text(a.common.out / "scores" / ("val_fold_" + k + ".csv"),
                    scores_csv(r.val_ids, r.val_scores));
    const Dataset val = dev.select(split.val_ids);
    const ScoredSet scored{r.val_scores, val.labels};
    const RocCurve roc = roc_curve(scored);
    write_file_text(a.common.out / "roc" / ("fold_" + k + ".csv"), roc_csv(roc));
    write_file_text(a.common.out / "metrics" / ("fold_" + k + ".json"),
                    metrics_json(summarize(scored, a.target_sensitivity)));
    log.info("fold_evaluated", {{"fold", split.fold_index}, {"auc", r.auc},
                                {"specificity", r.specificity}});
    results.push_back(std::move(r));
    models.push_back(std::move(model));
  }
  write_file_text(a.common.out / "results.json", results_json(results));

  const FoldResult& best = select_best_fold(results);
  const std::size_t best_pos = static_cast<std::size_t>(&best - results.data());
  if (a.refit_with_val) {
    FoldOptions options;
    options.params = models[best_pos].params;
    options.params.seed = a.common.seed;
    options.l2_normalize = models[best_pos].prep.l2_normalize;
    options.jobs = a.common.jobs;
    const FoldModel refit = refit_with_validation(dev, splits[best_pos], options);
    save_forest(a.common.out / "best_model.json", refit.model);
  } else {
    save_forest(a.common.out / "best_model.json", models[best_pos]);
  }
  write_config(a.common, "eval",
               {{"manifest", a.manifest.generic_string()},
                {"folds", a.folds.generic_string()},
                {"models", a.models.generic_string()},
                {"refit_with_val", a.refit_with_val},
                {"target_sensitivity", a.target_sensitivity}});

  char line[128];
  out << "fold     AUC%  Sens%  Spec%\n";
  for (const auto& r : results) {
    std::snprintf(line, sizeof line, "%-5d %7.2f %6.2f %6.2f\n", r.fold_index, r.auc,
                  r.sensitivity, r.specificity);
    out << line;
  }
  const FoldAverage avg = average(results);
  std::snprintf(line, sizeof line, "avg.  %7.2f %6.2f %6.2f\n", avg.auc, avg.sensitivity,
                avg.specificity);
  out << line << "best fold: " << best.fold_index << '\n';
  log.info("evaluated", {{"folds", results.size()}, {"best_fold", best.fold_index},
                         {"refit_with_val", a.refit_with_val}});
}

void cmd_search(const SearchArgs& a, std::ostream& out, Logger& log) {
  SearchConfig cfg = a.config;
  cfg.seed = a.common.seed;
  cfg.jobs = a.common.jobs;
  cfg.objective = parse_objective(a.objective);
  cfg.validate();

  const Dataset dev = load_dev(a.manifest);
  const std::vector<FoldSplit> splits = load_checked_splits(dev, a.folds, log);
  const auto it = std::find_if(splits.begin(), splits.end(),
                               [&](const FoldSplit& s) { return s.fold_index == a.fold; });
  if (it == splits.end()) {
    throw Error(ErrorCode::kInvalidArgument, "fold " + std::to_string(a.fold) + " not found");
  }
  const Dataset train = dev.select(it->train_ids);
  const Dataset val = dev.select(it->val_ids);

  const SearchResult result = evolve(train, val, cfg);
  const Fitness baseline =
      evaluate_genome(default_genome(), train, val, derive_seed(cfg.seed, "fitness"));
  for (std::size_t g = 0; g < result.best_per_generation.size(); ++g) {
    log.info("generation", {{"generation", g},
                            {"best_auc", result.best_per_generation[g].auc},
                            {"best_spec_at_80", result.best_per_generation[g].spec_at_80}});
  }

  write_file_text(a.common.out / "search_log.jsonl", search_log_jsonl(result.log));
  json history = json::array();
  for (const auto& f : result.best_per_generation) {
    history.push_back({{"auc", f.auc}, {"spec_at_80", f.spec_at_80}});
  }
  json best = {{"genome", genome_json(result.best)},
               {"auc", result.best_fitness.auc},
               {"spec_at_80", result.best_fitness.spec_at_80},
               {"default_genome", {{"auc", baseline.auc}, {"spec_at_80", baseline.spec_at_80}}},
               {"best_per_generation", std::move(history)},
               {"evaluations", result.log.size()},
               {"trainings", result.trainings}};
  write_file_text(a.common.out / "best_genome.json", best.dump(2) + "\n");
  write_config(a.common, "search",
               {{"manifest", a.manifest.generic_string()},
                {"folds", a.folds.generic_string()},
                {"fold", a.fold},
                {"generations", cfg.generations},
                {"population", cfg.population},
                {"tournament_size", cfg.tournament_size},
                {"crossover_prob", cfg.crossover_prob},
                {"mutation_prob", cfg.mutation_prob},
                {"elitism_count", cfg.elitism_count},
                {"objective", to_string(cfg.objective)},
                {"record_timing", cfg.record_timing}});
  out << "best AUC " << format_percent(result.best_fitness.auc) << " spec@80 "
      << format_percent(result.best_fitness.spec_at_80) << " (default genome AUC "
      << format_percent(baseline.auc) << ")\n";
  out << parameter_block(result.best.to_params(0))
      << "l2_normalize=" << (result.best.l2_normalize ? "true" : "false") << '\n';
}

void cmd_score(const ScoreArgs& a, std::ostream& out, Logger& log) {
  const bool single = !a.model.empty();
  const bool ensemble = !a.ensemble.empty();
  if (single == ensemble) {
    throw Error(ErrorCode::kInvalidArgument,
                "score needs exactly one of --model or --ensemble");
  }
  const Dataset data = load_dev(a.manifest);
  std::vector<double> scores;
  if (single) {
    scores = score_dataset(read_forest(a.model), data);
  } else {
    json doc;
    try {
      doc = json::parse(read_file_text(a.ensemble));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kInvalidArgument, "results file: " + std::string(e.what()));
    }
    Ensemble ens;
    try {
      const fs::path base = a.ensemble.parent_path();
      for (const auto& f : doc.at("folds")) {
        fs::path p = f.at("model_path").get<std::string>();
        ens.models.push_back(read_forest(p.is_relative() ? base / p : p));
      }
      ens.weights = doc.at("ensemble_weights").get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kInvalidArgument, "results file: " + std::string(e.what()));
    }
    scores = score_dataset(ens, data);
  }
  write_file_text(a.common.out / "scores.csv", scores_csv(data.ids, scores));

  bool both_classes = data.fully_labeled() && data.count_positive() > 0 &&
                      data.count_positive() < data.size();
  if (both_classes) {
    const ScoredSet scored{scores, data.labels};
    const MetricsSummary m = summarize(scored, a.target_sensitivity);
    write_file_text(a.common.out / "metrics.json", metrics_json(m));
    write_file_text(a.common.out / "roc.csv", roc_csv(roc_curve(scored)));
    out << "AUC " << format_percent(m.auc) << " spec " << format_percent(m.specificity) << '\n';
  } else {
    log.info("metrics_skipped", {{"reason", "labels missing or single class"}});
  }
  write_config(a.common, "score",
               {{"manifest", a.manifest.generic_string()},
                {"model", a.model.generic_string()},
                {"ensemble", a.ensemble.generic_string()},
                {"target_sensitivity", a.target_sensitivity}});
  log.info("scored", {{"rows", scores.size()}, {"mode", single ? "model" : "ensemble"}});
  out << "scored " << scores.size() << " recordings\n";
}

void cmd_project(const ProjectArgs& a, std::ostream& out, Logger& log) {
  TsneConfig cfg = a.config;
  cfg.seed = a.common.seed;
  cfg.jobs = a.common.jobs;
  Dataset data = load_dev(a.manifest);
  cfg.validate(data.size());
  if (a.prepare) data = transform_dataset(data, FeaturePrep{fit_scaler(data), true});
  const Projection proj = tsne(data, cfg);
  export_scatter(proj, a.common.out / "scatter.csv");
  write_file_text(a.common.out / "kl.csv", kl_history_csv(proj));
  write_config(a.common, "project",
               {{"manifest", a.manifest.generic_string()},
                {"perplexity", cfg.perplexity},
                {"iterations", cfg.iterations},
                {"learning_rate", cfg.learning_rate},
                {"early_exaggeration", cfg.early_exaggeration},
                {"exaggeration_iterations", cfg.exaggeration_iterations},
                {"prepare", a.prepare}});
  log.info("projected", {{"rows", data.size()}, {"final_kl", proj.kl_history.back()}});
  out << "projected " << data.size() << " points, final KL " << proj.kl_history.back() << '\n';
}

}  // namespace coughscreen::cli
