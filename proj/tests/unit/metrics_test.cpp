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

#include "coughscreen/metrics.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "coughscreen/rng.hpp"
#include "test_support.hpp"

namespace coughscreen {
namespace {

ScoredSet make_set(const std::vector<double>& pos, const std::vector<double>& neg) {
  ScoredSet s;
  for (double p : pos) {
    s.scores.push_back(p);
    s.labels.push_back(Label::kPositive);
  }
  for (double n : neg) {
    s.scores.push_back(n);
    s.labels.push_back(Label::kNegative);
  }
  return s;
}

ScoredSet random_set(Rng& rng, std::size_t n, double pos_frac) {
  ScoredSet s;
  for (std::size_t i = 0; i < n; ++i) {
    const bool pos = i == 0 || (i != 1 && rng.bernoulli(pos_frac));
    s.labels.push_back(pos ? Label::kPositive : Label::kNegative);
    double v = rng.uniform() * 0.7 + (pos ? 0.3 : 0.0);
    // Quantize some scores so ties occur.
    if (rng.bernoulli(0.3)) v = std::round(v * 20.0) / 20.0;
    s.scores.push_back(v);
  }
  return s;
}

// Direct evaluation of the grid rule, independent of the histogram code.
struct BruteOperatingPoint {
  double specificity = -1.0;
  double threshold = -1.0;
};

BruteOperatingPoint brute_force_grid(const ScoredSet& s, double target) {
  BruteOperatingPoint best;
  std::size_t P = 0, N = 0;
  for (Label l : s.labels) (is_positive(l) ? P : N)++;
  for (int i = 0; i <= 10000; ++i) {
    const double t = i / 10000.0;
    std::size_t tp = 0, fp = 0;
    for (std::size_t k = 0; k < s.scores.size(); ++k) {
      if (s.scores[k] >= t) (is_positive(s.labels[k]) ? tp : fp)++;
    }
    const double tpr = static_cast<double>(tp) / static_cast<double>(P);
    const double spec = 1.0 - static_cast<double>(fp) / static_cast<double>(N);
    if (tpr + 1e-12 >= target && spec >= best.specificity) best = {spec, t};
  }
  return best;
}

TEST(RocCurve, GridHas10001Thresholds) {
  const RocCurve roc = roc_curve(make_set({0.9, 0.4}, {0.1, 0.5}));
  ASSERT_EQ(roc.points.size(), 10001u);
  EXPECT_EQ(roc.points.front().threshold, 0.0);
  EXPECT_EQ(roc.points.back().threshold, 1.0);
  EXPECT_EQ(roc.points[1].threshold, 0.0001);
  EXPECT_EQ(roc.points[5000].threshold, 0.5);
  for (std::size_t i = 1; i < roc.points.size(); ++i) {
    ASSERT_LE(roc.points[i].tpr, roc.points[i - 1].tpr);
    ASSERT_LE(roc.points[i].fpr, roc.points[i - 1].fpr);
  }
}

TEST(RocCurve, Endpoints) {
  const RocCurve roc = roc_curve(make_set({1.0, 0.9}, {0.2, 1.0, 0.0}));
  EXPECT_EQ(roc.points.front().fpr, 1.0);
  EXPECT_EQ(roc.points.front().tpr, 1.0);
  // At t = 1 only scores of exactly 1.0 count.
  EXPECT_DOUBLE_EQ(roc.points.back().tpr, 0.5);
  EXPECT_DOUBLE_EQ(roc.points.back().fpr, 1.0 / 3.0);
}

TEST(RocCurve, PerfectSeparation) {
  const RocCurve roc = roc_curve(make_set({1.0, 1.0, 1.0}, {0.0, 0.0}));
  EXPECT_DOUBLE_EQ(roc.auc, 1.0);
  EXPECT_DOUBLE_EQ(specificity_at_sensitivity(roc, 0.8).specificity, 1.0);
}

TEST(RocCurve, AllEqualScores) {
  const ScoredSet s = make_set({0.3, 0.3}, {0.3, 0.3, 0.3});
  const RocCurve roc = roc_curve(s);
  EXPECT_DOUBLE_EQ(roc.auc, 0.5);
  EXPECT_DOUBLE_EQ(specificity_at_sensitivity(s, 0.8).specificity, 0.0);
}

TEST(RocCurve, ScoresAreClamped) {
  const RocCurve a = roc_curve(make_set({1.7, 0.6}, {-0.3, 0.2}));
  const RocCurve b = roc_curve(make_set({1.0, 0.6}, {0.0, 0.2}));
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    ASSERT_EQ(a.points[i].tpr, b.points[i].tpr);
    ASSERT_EQ(a.points[i].fpr, b.points[i].fpr);
  }
}

TEST(RocCurve, Errors) {
  EXPECT_ERROR_CODE(roc_curve(make_set({0.1, 0.2}, {})), ErrorCode::kSingleClassLabels);
  EXPECT_ERROR_CODE(roc_curve(make_set({}, {0.1})), ErrorCode::kSingleClassLabels);
  ScoredSet s = make_set({0.9}, {0.1});
  s.labels.push_back(Label::kUnknown);
  s.scores.push_back(0.5);
  EXPECT_ERROR_CODE(roc_curve(s), ErrorCode::kLabelMissing);
  ScoredSet nan = make_set({std::nan("")}, {0.1});
  EXPECT_ERROR_CODE(roc_curve(nan), ErrorCode::kInvalidArgument);
  EXPECT_ERROR_CODE(specificity_at_sensitivity(make_set({0.9}, {0.1}), 0.0),
                    ErrorCode::kInvalidArgument);
}

TEST(AucOracle, SmallCases) {
  EXPECT_DOUBLE_EQ(auc_pairwise_oracle(make_set({0.9}, {0.1})), 1.0);
  EXPECT_DOUBLE_EQ(auc_pairwise_oracle(make_set({0.5}, {0.5})), 0.5);
  EXPECT_DOUBLE_EQ(auc_pairwise_oracle(make_set({0.8, 0.4}, {0.6, 0.2})), 0.75);
}

TEST(AucOracle, InvariantUnderIncreasingTransform) {
  Rng rng(3);
  const ScoredSet s = random_set(rng, 200, 0.3);
  ScoredSet t = s;
  for (double& v : t.scores) v = std::exp(3.0 * v) - 7.0;
  EXPECT_DOUBLE_EQ(auc_pairwise_oracle(s), auc_pairwise_oracle(t));
}

TEST(AucOracle, LabelSwapComplements) {
  Rng rng(4);
  const ScoredSet s = random_set(rng, 150, 0.4);
  ScoredSet swapped = s;
  for (Label& l : swapped.labels) l = is_positive(l) ? Label::kNegative : Label::kPositive;
  EXPECT_NEAR(auc_pairwise_oracle(swapped), 1.0 - auc_pairwise_oracle(s), 1e-12);
}

TEST(RocCurve, GridAucMatchesOracle) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const ScoredSet s = random_set(rng, 50, 0.4);
    ASSERT_NEAR(roc_curve(s).auc, auc_pairwise_oracle(s), 1e-3);
  }
}

TEST(SpecificityAtSensitivity, WorkedExampleMatchesBruteForce) {
  const ScoredSet s = make_set({0.9, 0.7, 0.3, 0.2, 0.1}, {0.8, 0.4, 0.1, 0.05, 0.02});
  const OperatingPoint op = specificity_at_sensitivity(s, 0.8);
  const BruteOperatingPoint brute = brute_force_grid(s, 0.8);
  EXPECT_DOUBLE_EQ(op.specificity, brute.specificity);
  EXPECT_DOUBLE_EQ(op.threshold, brute.threshold);
  // TPR >= 0.8 needs the positive at 0.2, so t <= 0.2; the largest such
  // threshold excludes the negatives 0.1, 0.05, 0.02 and keeps 0.8 and 0.4.
  EXPECT_DOUBLE_EQ(op.specificity, 0.6);
  EXPECT_DOUBLE_EQ(op.threshold, 0.2);
  EXPECT_DOUBLE_EQ(op.sensitivity, 0.8);
}

TEST(SpecificityAtSensitivity, RandomSetsMatchBruteForce) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const ScoredSet s = random_set(rng, 80, 0.3);
    for (double target : {0.5, 0.8, 1.0}) {
      const OperatingPoint op = specificity_at_sensitivity(s, target);
      const BruteOperatingPoint brute = brute_force_grid(s, target);
      ASSERT_DOUBLE_EQ(op.specificity, brute.specificity);
      ASSERT_DOUBLE_EQ(op.threshold, brute.threshold);
      ASSERT_GE(op.sensitivity + 1e-12, target);
    }
  }
}

TEST(Formatting, PercentAndCsv) {
  EXPECT_EQ(format_percent(0.79534), "79.53");
  EXPECT_EQ(format_percent(1.0), "100.00");
  const std::string csv = roc_csv(roc_curve(make_set({0.9}, {0.1})));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "threshold,fpr,tpr");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 10002);
  const std::string json = metrics_json({0.9, 0.8, 0.7, 0.25});
  EXPECT_NE(json.find("\"decision_rule\": \"score >= threshold\""), std::string::npos);
}

}  // namespace
}  // namespace coughscreen
