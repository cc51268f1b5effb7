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

#ifndef COUGHSCREEN_METRICS_HPP_
#define COUGHSCREEN_METRICS_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "coughscreen/dataset.hpp"

namespace coughscreen {

/// Thresholds are i / kRocGridSteps for i = 0..kRocGridSteps inclusive.
inline constexpr int kRocGridSteps = 10000;
inline constexpr const char* kDecisionRule = "score >= threshold";

struct ScoredSet {
  std::vector<double> scores;
  std::vector<Label> labels;
};

struct RocPoint {
  double threshold;
  double fpr;
  double tpr;
};

struct RocCurve {
  /// One point per grid threshold, in increasing threshold order.
  std::vector<RocPoint> points;
  double auc = 0.0;
};

/// Grid threshold i as a double (i / 10000).
double grid_threshold(int i);

/// A sample is predicted positive iff its (clamped) score >= threshold.
/// Throws kSingleClassLabels unless both classes are present and kLabelMissing
/// for unlabeled entries.
RocCurve roc_curve(const ScoredSet& s);

/// Trapezoidal area over deduplicated (fpr, tpr) points sorted by fpr then
/// tpr, with (0,0) and (1,1) anchors added when absent.
double trapezoid_auc(std::span<const RocPoint> points);

struct OperatingPoint {
  double specificity = 0.0;
  /// TPR actually achieved at the chosen threshold.
  double sensitivity = 0.0;
  double threshold = 0.0;
};

/// Among grid thresholds whose TPR reaches target_tpr, the one with the
/// highest specificity; ties go to the largest threshold.
OperatingPoint specificity_at_sensitivity(const ScoredSet& s, double target_tpr);
OperatingPoint specificity_at_sensitivity(const RocCurve& roc, double target_tpr);

/// Exact rank AUC by brute force over all positive/negative pairs, ties
/// credited 0.5. Uses raw (unclamped) scores.
double auc_pairwise_oracle(const ScoredSet& s);

/// Percent with two decimals, e.g. 0.79534 -> "79.53".
std::string format_percent(double fraction);

std::string roc_csv(const RocCurve& roc);

struct MetricsSummary {
  double auc = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double threshold = 0.0;
};

MetricsSummary summarize(const ScoredSet& s, double target_tpr);
/// {auc, sensitivity, specificity, threshold, decision_rule}; rates as
/// fractions.
std::string metrics_json(const MetricsSummary& m);

}  // namespace coughscreen

#endif  // COUGHSCREEN_METRICS_HPP_
