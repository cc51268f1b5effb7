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

#include "coughscreen/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "coughscreen/rng.hpp"
#include "test_support.hpp"

namespace coughscreen {
namespace {

using testing::make_dataset;

ForestParams deep_best(int trees = 1) {
  ForestParams p;
  p.split_mode = SplitMode::kBest;
  p.min_samples_leaf = 1;
  p.min_samples_split = 2;
  p.n_estimators = trees;
  return p;
}

double training_accuracy(const Forest& f, const Dataset& d) {
  std::size_t right = 0;
  for (std::size_t r = 0; r < d.size(); ++r) {
    const bool pred = predict_proba(f, d.features.row(r)) >= 0.5;
    right += pred == is_positive(d.labels[r]);
  }
  return static_cast<double>(right) / static_cast<double>(d.size());
}

Dataset random_dataset(Rng& rng, std::size_t n, std::size_t dim, double pos_frac) {
  Dataset d;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(dim);
    const bool pos = i == 0 || (i != 1 && rng.bernoulli(pos_frac));
    for (double& v : row) v = rng.normal(pos ? 0.7 : 0.0, 1.0);
    // Some coarse columns so that ties and constant nodes occur.
    if (dim > 1) row[dim - 1] = std::round(row[dim - 1]);
    d.features.append_row(row);
    d.labels.push_back(pos ? Label::kPositive : Label::kNegative);
    d.ids.push_back(std::to_string(i));
  }
  return d;
}

// Eight points with distinct coordinates on both axes, labelled by a cut
// of the sort order along `axis`.
Dataset axis_toy(Rng& rng, int axis, int cut, bool flip) {
  std::vector<double> xs(8), ys(8);
  std::iota(xs.begin(), xs.end(), 0.0);
  std::iota(ys.begin(), ys.end(), 0.0);
  for (std::size_t i = 7; i > 0; --i) std::swap(ys[i], ys[rng.below(i + 1)]);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 8; ++i) {
    const double x = xs[i] * 0.37 + 0.1;
    const double y = ys[i] * 1.3 - 2.0;
    rows.push_back({x, y});
    const bool above = (axis == 0 ? xs[i] : ys[i]) >= cut;
    labels.push_back(above != flip ? 1 : 0);
  }
  return make_dataset(rows, labels);
}

TEST(Impurity, EntropyValues) {
  EXPECT_DOUBLE_EQ(entropy(5, 0), 0.0);
  EXPECT_DOUBLE_EQ(entropy(0, 5), 0.0);
  EXPECT_DOUBLE_EQ(entropy(5, 5), 1.0);
  const double closed = -0.75 * std::log2(0.75) - 0.25 * std::log2(0.25);
  EXPECT_NEAR(entropy(3, 1), closed, 1e-12);
  EXPECT_NEAR(entropy(3, 1), 0.811278, 1e-6);
  EXPECT_DOUBLE_EQ(entropy(1, 3), entropy(3, 1));
}

TEST(Impurity, Gini) {
  EXPECT_DOUBLE_EQ(gini(3, 1), 0.375);
  EXPECT_DOUBLE_EQ(gini(2, 2), 0.5);
  EXPECT_DOUBLE_EQ(gini(4, 0), 0.0);
  EXPECT_DOUBLE_EQ(impurity(Criterion::kGini, 3, 1), 0.375);
  EXPECT_DOUBLE_EQ(impurity(Criterion::kEntropy, 5, 5), 1.0);
}

TEST(ForestParams, DefaultsAndValidation) {
  const ForestParams p;
  EXPECT_EQ(p.n_estimators, 100);
  EXPECT_EQ(p.criterion, Criterion::kEntropy);
  EXPECT_DOUBLE_EQ(p.max_features, 0.75);
  EXPECT_EQ(p.min_samples_leaf, 4);
  EXPECT_EQ(p.min_samples_split, 3);
  EXPECT_FALSE(p.bootstrap);
  EXPECT_EQ(p.split_mode, SplitMode::kRandom);
  EXPECT_NO_THROW(p.validate());
  ForestParams bad = p;
  bad.max_features = 0.0;
  EXPECT_ERROR_CODE(bad.validate(), ErrorCode::kInvalidArgument);
  bad = p;
  bad.min_samples_split = 1;
  EXPECT_ERROR_CODE(bad.validate(), ErrorCode::kInvalidArgument);
  bad = p;
  bad.n_estimators = 0;
  EXPECT_ERROR_CODE(bad.validate(), ErrorCode::kInvalidArgument);
  bad = p;
  bad.min_samples_leaf = 0;
  EXPECT_ERROR_CODE(bad.validate(), ErrorCode::kInvalidArgument);
}

TEST(ForestParams, ParameterBlockFormat) {
  const std::string expect =
      "ExtraTreesClassifier(bootstrap=False,\n"
      "                     criterion=entropy,\n"
      "                     max_features=0.75,\n"
      "                     min_samples_leaf=4,\n"
      "                     min_samples_split=3,\n"
      "                     n_estimators=100)\n";
  EXPECT_EQ(parameter_block(ForestParams{}), expect);
  ForestParams best;
  best.split_mode = SplitMode::kBest;
  EXPECT_NE(parameter_block(best).find("split_mode=best"), std::string::npos);
}

TEST(ForestParams, ParseNames) {
  EXPECT_EQ(parse_criterion("gini"), Criterion::kGini);
  EXPECT_EQ(parse_split_mode("best"), SplitMode::kBest);
  EXPECT_ERROR_CODE(parse_criterion("mse"), ErrorCode::kInvalidArgument);
  EXPECT_ERROR_CODE(parse_split_mode("greedy"), ErrorCode::kInvalidArgument);
}

TEST(FeaturesPerSplit, FloorWithMinimumOne) {
  EXPECT_EQ(features_per_split(0.75, 7168), 5376u);
  EXPECT_EQ(features_per_split(0.75, 2), 1u);
  EXPECT_EQ(features_per_split(0.1, 5), 1u);
  EXPECT_EQ(features_per_split(1.0, 20), 20u);
  EXPECT_EQ(features_per_split(0.75, 20), 15u);
}

TEST(TrainForest, AxisSeparableToysReachFullAccuracy) {
  Rng rng(17);
  for (int axis = 0; axis < 2; ++axis) {
    for (int cut = 1; cut < 8; ++cut) {
      for (bool flip : {false, true}) {
        const Dataset d = axis_toy(rng, axis, cut, flip);
        for (double mf : {0.75, 1.0}) {
          ForestParams p = deep_best();
          p.max_features = mf;
          p.seed = static_cast<std::uint64_t>(axis * 100 + cut * 2 + flip);
          const Forest f = train_forest(d, p);
          ASSERT_EQ(training_accuracy(f, d), 1.0) << axis << " " << cut << " " << flip;
          if (mf == 1.0) {
            // Seeing both features, the best root split is the separating one.
            const auto& root = f.trees[0].nodes[0];
            ASSERT_FALSE(root.is_leaf());
            EXPECT_EQ(root.feature, axis);
            EXPECT_TRUE(f.trees[0].nodes[root.left].is_leaf());
            EXPECT_TRUE(f.trees[0].nodes[root.right].is_leaf());
          }
        }
      }
    }
  }
}

TEST(TrainForest, RandomModeAlsoFitsDistinctPoints) {
  Rng rng(23);
  const Dataset d = axis_toy(rng, 1, 3, false);
  ForestParams p = deep_best(5);
  p.split_mode = SplitMode::kRandom;
  EXPECT_EQ(training_accuracy(train_forest(d, p), d), 1.0);
}

TEST(TrainForest, HandTracedFourPointTree) {
  // Labels 0,1,0,1 along one axis. Root midpoints 0.5 and 2.5 tie on gain
  // (0.311); the first wins. The right node {1,2,3} then ties 1.5 vs 2.5 and
  // takes 1.5, leaving {2,3} to split at 2.5.
  const Dataset d = make_dataset({{0}, {1}, {2}, {3}}, {0, 1, 0, 1});
  const Forest f = train_forest(d, deep_best());
  const auto& n = f.trees[0].nodes;
  ASSERT_EQ(n.size(), 7u);
  EXPECT_EQ(n[0].threshold, 0.5);
  const TreeNode& left = n[n[0].left];
  EXPECT_TRUE(left.is_leaf());
  EXPECT_EQ(left.leaf_value, 0.0);
  EXPECT_EQ(left.count, 1u);
  const TreeNode& r = n[n[0].right];
  EXPECT_EQ(r.threshold, 1.5);
  EXPECT_EQ(r.count, 3u);
  EXPECT_TRUE(n[r.left].is_leaf());
  EXPECT_EQ(n[r.left].leaf_value, 1.0);
  EXPECT_EQ(n[r.right].threshold, 2.5);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(predict_proba(f, d.features.row(i)), is_positive(d.labels[i]) ? 1.0 : 0.0);
  }
}

TEST(TrainForest, ThresholdRoutesLessOrEqualLeft) {
  const Dataset d = make_dataset({{0}, {1}, {2}, {3}}, {0, 0, 1, 1});
  const Forest f = train_forest(d, deep_best());
  const auto& root = f.trees[0].nodes[0];
  EXPECT_EQ(root.threshold, 1.5);
  const std::vector<double> at = {1.5};
  EXPECT_EQ(f.trees[0].leaf_for(at), static_cast<std::size_t>(root.left));
  const std::vector<double> above = {std::nextafter(1.5, 2.0)};
  EXPECT_EQ(f.trees[0].leaf_for(above), static_cast<std::size_t>(root.right));
}

TEST(TrainForest, LeavesMatchTrainingCounts) {
  Rng rng(29);
  const Dataset d = random_dataset(rng, 120, 4, 0.3);
  ForestParams p;
  p.n_estimators = 8;
  const Forest f = train_forest(d, p);
  for (const Tree& t : f.trees) {
    std::vector<std::size_t> reach(t.nodes.size(), 0), pos(t.nodes.size(), 0);
    for (std::size_t r = 0; r < d.size(); ++r) {
      const std::size_t leaf = t.leaf_for(d.features.row(r));
      reach[leaf]++;
      pos[leaf] += is_positive(d.labels[r]);
    }
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
      const TreeNode& node = t.nodes[i];
      if (node.is_leaf()) {
        ASSERT_EQ(reach[i], node.count);
        ASSERT_GE(node.count, static_cast<std::uint32_t>(p.min_samples_leaf));
        ASSERT_DOUBLE_EQ(node.leaf_value,
                         static_cast<double>(pos[i]) / static_cast<double>(node.count));
      } else {
        ASSERT_GT(node.left, static_cast<std::int32_t>(i));
        ASSERT_GT(node.right, static_cast<std::int32_t>(i));
        ASSERT_EQ(t.nodes[node.left].count + t.nodes[node.right].count, node.count);
      }
    }
  }
}

TEST(TrainForest, AcceptedGainsAreNonnegative) {
  Rng rng(31);
  for (int run = 0; run < 200; ++run) {
    const Dataset d = random_dataset(rng, 10 + rng.below(60), 1 + rng.below(5), 0.1 + 0.4 * rng.uniform());
    ForestParams p;
    p.n_estimators = 3;
    p.criterion = rng.bernoulli(0.5) ? Criterion::kGini : Criterion::kEntropy;
    p.split_mode = rng.bernoulli(0.5) ? SplitMode::kBest : SplitMode::kRandom;
    p.bootstrap = rng.bernoulli(0.5);
    p.max_features = rng.uniform(0.1, 1.0);
    p.min_samples_leaf = static_cast<int>(rng.between(1, 5));
    p.min_samples_split = static_cast<int>(rng.between(2, 8));
    p.seed = rng.next_u64();
    TrainingStats stats;
    const Forest f = train_forest(d, p, &stats);
    ASSERT_EQ(f.trees.size(), 3u);
    if (stats.internal_nodes > 0) ASSERT_GE(stats.min_accepted_gain, 0.0);
  }
}

TEST(TrainForest, BootstrapTreesSeeNSamples) {
  Rng rng(37);
  const Dataset d = random_dataset(rng, 90, 3, 0.3);
  ForestParams p;
  p.bootstrap = true;
  p.n_estimators = 6;
  const Forest f = train_forest(d, p);
  bool some_tree_differs = false;
  for (const Tree& t : f.trees) {
    EXPECT_EQ(t.nodes[0].count, 90u);
    std::size_t pos_leaf_mass = 0;
    for (const auto& n : t.nodes) {
      if (n.is_leaf()) pos_leaf_mass += static_cast<std::size_t>(std::lround(n.leaf_value * n.count));
    }
    // A resample almost never reproduces the exact positive count.
    some_tree_differs = some_tree_differs || pos_leaf_mass != d.count_positive();
  }
  EXPECT_TRUE(some_tree_differs);
}

TEST(TrainForest, DeterministicAndJobIndependent) {
  Rng rng(41);
  const Dataset d = random_dataset(rng, 150, 6, 0.2);
  ForestParams p;
  p.n_estimators = 12;
  p.seed = 99;
  const std::string a = serialize_forest(train_forest(d, p, nullptr, 1));
  const std::string b = serialize_forest(train_forest(d, p, nullptr, 1));
  const std::string c = serialize_forest(train_forest(d, p, nullptr, 4));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
  p.seed = 100;
  EXPECT_NE(a, serialize_forest(train_forest(d, p)));
}

TEST(TrainForest, AddingTreesKeepsEarlierTrees) {
  Rng rng(43);
  const Dataset d = random_dataset(rng, 80, 3, 0.3);
  ForestParams p;
  p.n_estimators = 3;
  const Forest small = train_forest(d, p);
  p.n_estimators = 6;
  const Forest big = train_forest(d, p);
  for (std::size_t t = 0; t < 3; ++t) EXPECT_TRUE(small.trees[t].nodes == big.trees[t].nodes);
}

TEST(TrainForest, Errors) {
  EXPECT_ERROR_CODE(train_forest(make_dataset({{1}, {2}, {3}}, {1, 1, 1}), ForestParams{}),
                    ErrorCode::kSingleClassData);
  Dataset nan = make_dataset({{1}, {2}, {3}}, {0, 1, 0});
  nan.features(1, 0) = std::nan("");
  EXPECT_ERROR_CODE(train_forest(nan, ForestParams{}), ErrorCode::kNaNFeature);
  EXPECT_ERROR_CODE(train_forest(make_dataset({{1}, {2}}, {0, 1}), ForestParams{}),
                    ErrorCode::kTooFewSamples);
  Dataset unlabeled = make_dataset({{1}, {2}, {3}}, {0, 1, 0});
  unlabeled.labels[2] = Label::kUnknown;
  EXPECT_ERROR_CODE(train_forest(unlabeled, ForestParams{}), ErrorCode::kLabelMissing);
}

Forest constant_forest(std::vector<double> leaf_values) {
  Forest f;
  f.feature_dim = 2;
  for (double v : leaf_values) {
    Tree t;
    TreeNode leaf;
    leaf.leaf_value = v;
    leaf.count = 4;
    t.nodes.push_back(leaf);
    f.trees.push_back(t);
  }
  f.params.n_estimators = static_cast<int>(f.trees.size());
  return f;
}

TEST(PredictProba, MeanOfLeaves) {
  const std::vector<double> x = {0.0, 0.0};
  EXPECT_DOUBLE_EQ(predict_proba(constant_forest({0.75}), x), 0.75);
  EXPECT_DOUBLE_EQ(predict_proba(constant_forest({0.2, 0.6}), x), 0.4);
  const std::vector<double> wrong = {0.0};
  EXPECT_ERROR_CODE(predict_proba(constant_forest({0.5}), wrong), ErrorCode::kDimensionMismatch);
}

TEST(PredictProba, AlwaysInUnitInterval) {
  Rng rng(47);
  const Dataset d = random_dataset(rng, 100, 3, 0.4);
  const Forest f = train_forest(d, ForestParams{});
  for (int i = 0; i < 200; ++i) {
    const std::vector<double> x = {rng.normal(0, 5), rng.normal(0, 5), rng.normal(0, 5)};
    const double p = predict_proba(f, x);
    ASSERT_GE(p, 0.0);
    ASSERT_LE(p, 1.0);
  }
}

TEST(ForestIo, RoundTripPredictsIdentically) {
  Rng rng(53);
  const Dataset d = random_dataset(rng, 100, 5, 0.3);
  Forest f = train_forest(d, ForestParams{});
  f.prep.scaler = {{0.1, 0.2, 0.3, 0.4, 0.5}, {1, 2, 3, 0, 5}, 100};
  const std::string text = serialize_forest(f);
  const Forest g = load_forest(text);
  EXPECT_EQ(serialize_forest(g), text);
  EXPECT_EQ(g.params, f.params);
  EXPECT_EQ(g.feature_dim, 5u);
  EXPECT_EQ(g.prep.scaler.std, f.prep.scaler.std);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> x(5);
    for (double& v : x) v = rng.normal(0, 2);
    ASSERT_EQ(score_raw(f, x), score_raw(g, x));
    ASSERT_EQ(predict_proba(f, x), predict_proba(g, x));
  }
}

TEST(ForestIo, Failures) {
  Rng rng(59);
  const std::string text =
      serialize_forest(train_forest(random_dataset(rng, 40, 2, 0.3), ForestParams{}));
  EXPECT_ERROR_CODE(load_forest(text.substr(0, text.size() / 2)), ErrorCode::kCorruptModelFile);
  EXPECT_ERROR_CODE(load_forest("[]"), ErrorCode::kCorruptModelFile);
  std::string bumped = text;
  const auto pos = bumped.find("\"format_version\":1");
  ASSERT_NE(pos, std::string::npos);
  bumped.replace(pos, 18, "\"format_version\":2");
  EXPECT_ERROR_CODE(load_forest(bumped), ErrorCode::kVersionMismatch);
  EXPECT_ERROR_CODE(read_forest("/nonexistent/model.json"), ErrorCode::kIoError);
}

TEST(ScoreRaw, EmptyScalerSkipsStandardization) {
  Rng rng(61);
  const Dataset d = random_dataset(rng, 60, 2, 0.3);
  Forest f = train_forest(d, ForestParams{});
  const std::vector<double> x = {0.3, -0.4};
  f.prep.l2_normalize = false;
  EXPECT_EQ(score_raw(f, x), predict_proba(f, x));
  f.prep.l2_normalize = true;
  const std::vector<double> unit = {0.6, -0.8};
  EXPECT_EQ(score_raw(f, x), predict_proba(f, unit));
}

}  // namespace
}  // namespace coughscreen
