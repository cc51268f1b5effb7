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

#ifndef COUGHSCREEN_FOREST_HPP_
#define COUGHSCREEN_FOREST_HPP_

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coughscreen/dataset.hpp"
#include "coughscreen/feature_prep.hpp"

namespace coughscreen {

enum class Criterion { kEntropy, kGini };
enum class SplitMode {
  /// One uniform threshold per candidate feature (extremely randomized).
  kRandom,
  /// Best midpoint per candidate feature (classic random forest).
  kBest,
};

std::string_view to_string(Criterion c);
std::string_view to_string(SplitMode m);
Criterion parse_criterion(std::string_view s);
SplitMode parse_split_mode(std::string_view s);

/// Defaults are the tuned extremely-randomized configuration.
struct ForestParams {
  int n_estimators = 100;
  Criterion criterion = Criterion::kEntropy;
  double max_features = 0.75;
  int min_samples_leaf = 4;
  int min_samples_split = 3;
  bool bootstrap = false;
  SplitMode split_mode = SplitMode::kRandom;
  std::uint64_t seed = 0;

  /// Throws kInvalidArgument for out-of-range values.
  void validate() const;

  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

/// One-line human-readable rendering of every parameter.
std::string describe(const ForestParams& p);

/// Multi-line constructor-style listing of the hyperparameters. The split
/// mode is appended only when it differs from the randomized default.
std::string parameter_block(const ForestParams& p);

/// k = max(1, floor(max_features * dim)).
std::size_t features_per_split(double max_features, std::size_t dim);

/// Binary entropy in bits of a node with the given class counts.
double entropy(std::size_t pos, std::size_t neg);
double gini(std::size_t pos, std::size_t neg);
double impurity(Criterion c, std::size_t pos, std::size_t neg);

/// Flat tree node. Leaves have feature == -1; internal nodes route
/// `value <= threshold` to `left`.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  /// Positive fraction at a leaf; 0 for internal nodes.
  double leaf_value = 0.0;
  /// Training samples that reached this node.
  std::uint32_t count = 0;

  bool is_leaf() const { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct Tree {
  std::vector<TreeNode> nodes;

  /// Index of the leaf reached by x.
  std::size_t leaf_for(std::span<const double> x) const;
  double predict(std::span<const double> x) const {
    return nodes[leaf_for(x)].leaf_value;
  }
};

struct TrainingStats {
  std::size_t internal_nodes = 0;
  std::size_t leaves = 0;
  /// Smallest impurity decrease among accepted splits.
  double min_accepted_gain = std::numeric_limits<double>::infinity();
};

/// Trained ensemble plus the preprocessing that produced its inputs. An
/// empty scaler skips standardization; the L2 step still follows the flag.
struct Forest {
  std::vector<Tree> trees;
  ForestParams params;
  FeaturePrep prep;
  std::size_t feature_dim = 0;
};

/// Grows params.n_estimators trees on already-prepared features. Tree t
/// draws from its own stream derived from (params.seed, "tree", t), so the
/// result does not depend on `jobs`. Throws kSingleClassData, kNaNFeature,
/// kLabelMissing or kInvalidArgument.
Forest train_forest(const Dataset& data, const ForestParams& params,
                    TrainingStats* stats = nullptr, unsigned jobs = 1);

/// Mean leaf value over all trees for an already-prepared vector.
/// Throws kDimensionMismatch.
double predict_proba(const Forest& forest, std::span<const double> x);

/// Applies forest.prep to a raw feature vector, then predicts.
double score_raw(const Forest& forest, std::span<const double> raw);

inline constexpr int kModelFormatVersion = 1;

std::string serialize_forest(const Forest& forest);
/// Throws kCorruptModelFile or kVersionMismatch.
Forest load_forest(std::string_view text);

void save_forest(const std::filesystem::path& path, const Forest& forest);
Forest read_forest(const std::filesystem::path& path);

}  // namespace coughscreen

#endif  // COUGHSCREEN_FOREST_HPP_
