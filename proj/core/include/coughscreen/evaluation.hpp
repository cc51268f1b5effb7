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

#ifndef COUGHSCREEN_EVALUATION_HPP_
#define COUGHSCREEN_EVALUATION_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "coughscreen/dataset.hpp"
#include "coughscreen/forest.hpp"

namespace coughscreen {

struct FoldSplit {
  int fold_index = 0;
  std::vector<std::string> train_ids;
  std::vector<std::string> val_ids;
};

/// Reads train_fold_{k}.txt / val_fold_{k}.txt for k = 1, 2, ... until the
/// next pair is absent. One id per line; blank lines and surrounding
/// whitespace are ignored. Throws kIoError when no fold is found or a pair
/// is incomplete.
std::vector<FoldSplit> load_fold_splits(const std::filesystem::path& dir);
void write_fold_splits(const std::filesystem::path& dir,
                       std::span<const FoldSplit> splits);

/// Checks that every id exists in `dev` with a label and that train and
/// validation do not overlap. Throws kMissingId, kLabelMissing or
/// kInvalidSplit. Returns warnings for softer problems: a fold that does not
/// cover the whole of `dev`, or a train/validation ratio far from 4:1.
std::vector<std::string> validate_splits(const Dataset& dev,
                                         std::span<const FoldSplit> splits);

enum class ScalerScope {
  /// Fit on the fold's training ids only.
  kTrain,
  /// Fit on the fold's training and validation ids.
  kAll,
};

ScalerScope parse_scaler_scope(std::string_view s);
std::string_view to_string(ScalerScope s);

inline constexpr double kDefaultTargetSensitivity = 0.8;

struct FoldOptions {
  /// params.seed is the master seed; each fold derives its own.
  ForestParams params;
  bool l2_normalize = true;
  ScalerScope scaler_scope = ScalerScope::kTrain;
  double target_sensitivity = kDefaultTargetSensitivity;
  unsigned jobs = 1;
};

struct FoldModel {
  int fold_index = 0;
  Forest model;
  /// Ids the scaler was fitted on.
  std::vector<std::string> scaler_ids;
};

/// Fits the scaler, prepares features and trains the fold's forest.
FoldModel train_fold(const Dataset& dev, const FoldSplit& split,
                     const FoldOptions& options);

/// Trains on train + validation with the same derived seed as train_fold.
FoldModel refit_with_validation(const Dataset& dev, const FoldSplit& split,
                                const FoldOptions& options);

struct FoldResult {
  int fold_index = 0;
  /// Percentages in [0, 100].
  double auc = 0.0;
  /// The target sensitivity, as reported in the results table.
  double sensitivity = 0.0;
  double specificity = 0.0;
  /// TPR and threshold of the chosen operating point.
  double achieved_sensitivity = 0.0;
  double threshold = 0.0;
  std::string model_path;
  std::vector<std::string> val_ids;
  std::vector<double> val_scores;
};

/// Scores the fold's validation ids with `model` and computes its metrics.
FoldResult evaluate_fold(const Dataset& dev, const FoldSplit& split,
                         const Forest& model, double target_sensitivity);

/// train_fold + evaluate_fold for every split. Folds run in parallel when
/// options.jobs > 1; results are ordered by fold_index.
std::vector<FoldResult> run_folds(const Dataset& dev,
                                  std::span<const FoldSplit> splits,
                                  const FoldOptions& options,
                                  std::vector<FoldModel>* models = nullptr);

struct FoldAverage {
  double auc = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
};

FoldAverage average(std::span<const FoldResult> results);

/// Highest AUC; ties by higher specificity, then lower fold_index.
/// Throws kInvalidArgument on an empty list.
const FoldResult& select_best_fold(std::span<const FoldResult> results);

/// Validation AUCs normalized to sum to one.
std::vector<double> ensemble_weights(std::span<const FoldResult> results);

struct Ensemble {
  std::vector<Forest> models;
  std::vector<double> weights;
};

/// Scores every row of raw (unprepared) features.
std::vector<double> score_dataset(const Forest& model, const Dataset& data);
std::vector<double> score_dataset(const Ensemble& ensemble, const Dataset& data);

/// "id,score" header, scores with six decimals.
std::string scores_csv(std::span<const std::string> ids,
                       std::span<const double> scores);

/// Results JSON: folds[{fold, auc, sensitivity, specificity, model_path,
/// ...}], average{...}, best_fold, ensemble_weights.
std::string results_json(std::span<const FoldResult> results);

struct SyntheticConfig {
  std::size_t n = 1000;
  std::size_t dim = 20;
  /// Positive fraction.
  double imbalance = 0.1;
  /// Distance between class means in units of the per-class std.
  double separation = 6.0;
  int folds = 5;
  std::uint64_t seed = 42;
};

struct SyntheticData {
  Dataset data;
  std::vector<FoldSplit> splits;
};

/// Two spherical unit-variance Gaussian classes with round(n * imbalance)
/// positives, plus stratified folds. Deterministic under seed.
SyntheticData make_synthetic(const SyntheticConfig& config);

}  // namespace coughscreen

#endif  // COUGHSCREEN_EVALUATION_HPP_
