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

#include "coughscreen/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <unordered_set>

#include "json.hpp"

#include "coughscreen/error.hpp"
#include "coughscreen/feature_prep.hpp"
#include "coughscreen/io.hpp"
#include "coughscreen/metrics.hpp"
#include "coughscreen/parallel.hpp"
#include "coughscreen/rng.hpp"

namespace coughscreen {
namespace fs = std::filesystem;

namespace {

std::vector<std::string> read_id_list(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    const auto b = line.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r\n");
    ids.push_back(line.substr(b, e - b + 1));
  }
  return ids;
}

fs::path train_file(const fs::path& dir, int k) {
  return dir / ("train_fold_" + std::to_string(k) + ".txt");
}

fs::path val_file(const fs::path& dir, int k) {
  return dir / ("val_fold_" + std::to_string(k) + ".txt");
}

std::vector<std::string> concat(const std::vector<std::string>& a,
                                const std::vector<std::string>& b) {
  std::vector<std::string> out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

ForestParams fold_params(const FoldOptions& options, int fold_index) {
  ForestParams p = options.params;
  p.seed = derive_seed(options.params.seed, "fold",
                       static_cast<std::uint64_t>(fold_index));
  return p;
}

FoldModel fit_on(const Dataset& dev, const std::vector<std::string>& train_ids,
                 const std::vector<std::string>& scaler_ids, int fold_index,
                 const FoldOptions& options) {
  const Dataset train = dev.select(train_ids);
  const Dataset scaler_rows = dev.select(scaler_ids);
  FoldModel fm;
  fm.fold_index = fold_index;
  fm.scaler_ids = scaler_ids;
  FeaturePrep prep{fit_scaler(scaler_rows), options.l2_normalize};
  fm.model = train_forest(transform_dataset(train, prep),
                          fold_params(options, fold_index), nullptr, options.jobs);
  fm.model.prep = std::move(prep);
  return fm;
}

}  // namespace

std::vector<FoldSplit> load_fold_splits(const fs::path& dir) {
  std::vector<FoldSplit> splits;
  for (int k = 1;; ++k) {
    const bool has_train = fs::exists(train_file(dir, k));
    const bool has_val = fs::exists(val_file(dir, k));
    if (!has_train && !has_val) break;
    if (has_train != has_val) {
      throw Error(ErrorCode::kIoError,
                  "fold " + std::to_string(k) + " in " + dir.string() +
                      " is missing its " + (has_train ? "val" : "train") + " list");
    }
    splits.push_back({k, read_id_list(train_file(dir, k)), read_id_list(val_file(dir, k))});
  }
  if (splits.empty()) {
    throw Error(ErrorCode::kIoError, "no train_fold_1.txt in " + dir.string());
  }
  return splits;
}

void write_fold_splits(const fs::path& dir, std::span<const FoldSplit> splits) {
  auto join = [](const std::vector<std::string>& ids) {
    std::string s;
    for (const auto& id : ids) s += id + "\n";
    return s;
  };
  for (const auto& split : splits) {
    write_file_text(train_file(dir, split.fold_index), join(split.train_ids));
    write_file_text(val_file(dir, split.fold_index), join(split.val_ids));
  }
}

std::vector<std::string> validate_splits(const Dataset& dev,
                                         std::span<const FoldSplit> splits) {
  const auto idx = dev.index();
  std::vector<std::string> warnings;
  for (const auto& split : splits) {
    const std::string fold = "fold " + std::to_string(split.fold_index);
    std::unordered_set<std::string> seen;
    for (const auto* list : {&split.train_ids, &split.val_ids}) {
      for (const auto& id : *list) {
        const auto it = idx.find(id);
        if (it == idx.end()) {
          throw Error(ErrorCode::kMissingId, fold + ": id '" + id + "' is not in the manifest");
        }
        if (dev.labels[it->second] == Label::kUnknown) {
          throw Error(ErrorCode::kLabelMissing, fold + ": id '" + id + "' has no label");
        }
        if (!seen.insert(id).second) {
          throw Error(ErrorCode::kInvalidSplit,
                      fold + ": id '" + id + "' appears more than once across train/val");
        }
      }
    }
    if (split.train_ids.empty() || split.val_ids.empty()) {
      throw Error(ErrorCode::kInvalidSplit, fold + ": train and val must be non-empty");
    }
    if (seen.size() != dev.size()) {
      warnings.push_back(fold + " covers " + std::to_string(seen.size()) + " of " +
                         std::to_string(dev.size()) + " development ids");
    }
    const double ratio = static_cast<double>(split.train_ids.size()) /
                         static_cast<double>(split.val_ids.size());
    if (ratio < 4.0 * 0.9 || ratio > 4.0 * 1.1) {
      char buf[96];
      std::snprintf(buf, sizeof buf, " train/val ratio is %.2f, expected about 4", ratio);
      warnings.push_back(fold + buf);
    }
  }
  return warnings;
}

ScalerScope parse_scaler_scope(std::string_view s) {
  if (s == "train") return ScalerScope::kTrain;
  if (s == "all") return ScalerScope::kAll;
  throw Error(ErrorCode::kInvalidArgument, "unknown scaler scope '" + std::string(s) + "'");
}

std::string_view to_string(ScalerScope s) {
  return s == ScalerScope::kTrain ? "train" : "all";
}

FoldModel train_fold(const Dataset& dev, const FoldSplit& split,
                     const FoldOptions& options) {
  const auto scaler_ids = options.scaler_scope == ScalerScope::kTrain
                              ? split.train_ids
                              : concat(split.train_ids, split.val_ids);
  return fit_on(dev, split.train_ids, scaler_ids, split.fold_index, options);
}

FoldModel refit_with_validation(const Dataset& dev, const FoldSplit& split,
                                const FoldOptions& options) {
  const auto all = concat(split.train_ids, split.val_ids);
  return fit_on(dev, all, all, split.fold_index, options);
}

FoldResult evaluate_fold(const Dataset& dev, const FoldSplit& split,
                         const Forest& model, double target_sensitivity) {
  const Dataset val = dev.select(split.val_ids);
  ScoredSet scored{score_dataset(model, val), val.labels};
  const RocCurve roc = roc_curve(scored);
  const OperatingPoint op = specificity_at_sensitivity(roc, target_sensitivity);
  FoldResult r;
  r.fold_index = split.fold_index;
  r.auc = 100.0 * roc.auc;
  r.sensitivity = 100.0 * target_sensitivity;
  r.specificity = 100.0 * op.specificity;
  r.achieved_sensitivity = 100.0 * op.sensitivity;
  r.threshold = op.threshold;
  r.val_ids = val.ids;
  r.val_scores = std::move(scored.scores);
  return r;
}

std::vector<FoldResult> run_folds(const Dataset& dev, std::span<const FoldSplit> splits,
                                  const FoldOptions& options,
                                  std::vector<FoldModel>* models) {
  validate_splits(dev, splits);
  std::vector<FoldResult> results(splits.size());
  std::vector<FoldModel> trained(splits.size());
  FoldOptions inner = options;
  // Parallelism goes to folds; trees inside a fold then run sequentially.
  if (splits.size() > 1 && options.jobs != 1) inner.jobs = 1;
  parallel_for(splits.size(), options.jobs, [&](std::size_t i) {
    trained[i] = train_fold(dev, splits[i], inner);
    results[i] = evaluate_fold(dev, splits[i], trained[i].model,
                               options.target_sensitivity);
  });
  std::vector<std::size_t> order(splits.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return results[a].fold_index < results[b].fold_index;
  });
  std::vector<FoldResult> sorted;
  std::vector<FoldModel> sorted_models;
  for (std::size_t i : order) {
    sorted.push_back(std::move(results[i]));
    sorted_models.push_back(std::move(trained[i]));
  }
  if (models) *models = std::move(sorted_models);
  return sorted;
}

FoldAverage average(std::span<const FoldResult> results) {
  FoldAverage a;
  if (results.empty()) return a;
  for (const auto& r : results) {
    a.auc += r.auc;
    a.sensitivity += r.sensitivity;
    a.specificity += r.specificity;
  }
  const double n = static_cast<double>(results.size());
  a.auc /= n;
  a.sensitivity /= n;
  a.specificity /= n;
  return a;
}

const FoldResult& select_best_fold(std::span<const FoldResult> results) {
  if (results.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no fold results to select from");
  }
  const FoldResult* best = &results[0];
  for (const auto& r : results.subspan(1)) {
    const bool better =
        r.auc > best->auc ||
        (r.auc == best->auc &&
         (r.specificity > best->specificity ||
          (r.specificity == best->specificity && r.fold_index < best->fold_index)));
    if (better) best = &r;
  }
  return *best;
}

std::vector<double> ensemble_weights(std::span<const FoldResult> results) {
  std::vector<double> w;
  double total = 0.0;
  for (const auto& r : results) {
    w.push_back(std::max(0.0, r.auc));
    total += w.back();
  }
  if (w.empty()) return w;
  if (total <= 0.0) {
    std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(w.size()));
    return w;
  }
  for (double& x : w) x /= total;
  return w;
}

std::vector<double> score_dataset(const Forest& model, const Dataset& data) {
  std::vector<double> scores(data.size());
  for (std::size_t r = 0; r < data.size(); ++r) {
    scores[r] = score_raw(model, data.features.row(r));
  }
  return scores;
}

std::vector<double> score_dataset(const Ensemble& ensemble, const Dataset& data) {
  if (ensemble.models.empty() || ensemble.models.size() != ensemble.weights.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "ensemble needs one weight per model and at least one model");
  }
  if (ensemble.models.size() == 1) return score_dataset(ensemble.models[0], data);
  double total = 0.0;
  for (double w : ensemble.weights) {
    if (!(w >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "negative ensemble weight");
    total += w;
  }
  if (total <= 0.0) throw Error(ErrorCode::kInvalidArgument, "ensemble weights sum to zero");
  std::vector<double> scores(data.size(), 0.0);
  for (std::size_t m = 0; m < ensemble.models.size(); ++m) {
    const auto s = score_dataset(ensemble.models[m], data);
    for (std::size_t r = 0; r < s.size(); ++r) {
      scores[r] += ensemble.weights[m] / total * s[r];
    }
  }
  for (double& s : scores) s = std::clamp(s, 0.0, 1.0);
  return scores;
}

std::string scores_csv(std::span<const std::string> ids, std::span<const double> scores) {
  if (ids.size() != scores.size()) {
    throw Error(ErrorCode::kInvalidArgument, "ids and scores differ in length");
  }
  std::string out = "id,score\n";
  char buf[32];
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6f", scores[i]);
    out += ids[i];
    out += ',';
    out += buf;
    out += '\n';
  }
  return out;
}

std::string results_json(std::span<const FoldResult> results) {
  using nlohmann::json;
  json folds = json::array();
  for (const auto& r : results) {
    folds.push_back({{"fold", r.fold_index},
                     {"auc", r.auc},
                     {"sensitivity", r.sensitivity},
                     {"specificity", r.specificity},
                     {"achieved_sensitivity", r.achieved_sensitivity},
                     {"threshold", r.threshold},
                     {"model_path", r.model_path}});
  }
  const FoldAverage avg = average(results);
  json doc = {{"folds", std::move(folds)},
              {"average",
               {{"auc", avg.auc},
                {"sensitivity", avg.sensitivity},
                {"specificity", avg.specificity}}},
              {"decision_rule", kDecisionRule}};
  if (!results.empty()) {
    doc["best_fold"] = select_best_fold(results).fold_index;
    doc["ensemble_weights"] = ensemble_weights(results);
  }
  return doc.dump(2) + "\n";
}

SyntheticData make_synthetic(const SyntheticConfig& config) {
  if (config.n < 50) throw Error(ErrorCode::kInvalidArgument, "synthetic n must be >= 50");
  if (config.dim < 1) throw Error(ErrorCode::kInvalidArgument, "synthetic dim must be >= 1");
  if (!(config.imbalance > 0.0 && config.imbalance < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "imbalance must be in (0, 1)");
  }
  if (config.folds < 2) throw Error(ErrorCode::kInvalidArgument, "need at least 2 folds");
  if (!(config.separation >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "separation must be >= 0");
  }

  Rng rng(derive_seed(config.seed, "synth"));
  const auto n_pos = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(static_cast<double>(config.n) * config.imbalance)),
      1, config.n - 1);

  // Shuffle class assignments over rows.
  std::vector<Label> labels(config.n, Label::kNegative);
  std::fill_n(labels.begin(), n_pos, Label::kPositive);
  for (std::size_t i = labels.size() - 1; i > 0; --i) {
    std::swap(labels[i], labels[rng.below(i + 1)]);
  }

  const double offset = config.separation / std::sqrt(static_cast<double>(config.dim));
  SyntheticData out;
  out.data.features = Matrix<double>(config.n, config.dim);
  out.data.labels = labels;
  char id[32];
  for (std::size_t r = 0; r < config.n; ++r) {
    std::snprintf(id, sizeof id, "synth_%05zu", r);
    out.data.ids.emplace_back(id);
    const double mean = is_positive(labels[r]) ? offset : 0.0;
    for (double& v : out.data.features.row(r)) v = rng.normal(mean, 1.0);
  }

  // Stratified folds: shuffle each class and deal round-robin.
  std::vector<int> fold_of(config.n, 0);
  for (Label cls : {Label::kPositive, Label::kNegative}) {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < config.n; ++r) {
      if (labels[r] == cls) rows.push_back(r);
    }
    for (std::size_t i = rows.size(); i > 1; --i) {
      std::swap(rows[i - 1], rows[rng.below(i)]);
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
      fold_of[rows[i]] = static_cast<int>(i % static_cast<std::size_t>(config.folds));
    }
  }
  for (int k = 0; k < config.folds; ++k) {
    FoldSplit split;
    split.fold_index = k + 1;
    for (std::size_t r = 0; r < config.n; ++r) {
      (fold_of[r] == k ? split.val_ids : split.train_ids).push_back(out.data.ids[r]);
    }
    out.splits.push_back(std::move(split));
  }
  return out;
}

}  // namespace coughscreen
