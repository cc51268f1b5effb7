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

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "json.hpp"

#include "coughscreen/error.hpp"

namespace coughscreen {
namespace {

// Rates are ratios of small integers; comparisons against a target absorb
// the last-bit error of the division.
constexpr double kRateSlack = 1e-12;

struct ClassCounts {
  std::size_t pos = 0;
  std::size_t neg = 0;
};

ClassCounts check_labels(const ScoredSet& s) {
  if (s.scores.size() != s.labels.size()) {
    throw Error(ErrorCode::kInvalidArgument, "scores and labels differ in length");
  }
  ClassCounts c;
  for (std::size_t i = 0; i < s.labels.size(); ++i) {
    if (s.labels[i] == Label::kUnknown) {
      throw Error(ErrorCode::kLabelMissing, "scored set has an unlabeled entry");
    }
    if (!std::isfinite(s.scores[i])) {
      throw Error(ErrorCode::kInvalidArgument, "scores must be finite");
    }
    is_positive(s.labels[i]) ? ++c.pos : ++c.neg;
  }
  if (c.pos == 0 || c.neg == 0) {
    throw Error(ErrorCode::kSingleClassLabels,
                "ROC needs at least one positive and one negative label");
  }
  return c;
}

/// Highest grid index i with grid_threshold(i) <= score.
int grid_index_at_or_below(double score) {
  int i = static_cast<int>(std::floor(score * kRocGridSteps));
  i = std::clamp(i, 0, kRocGridSteps);
  while (i < kRocGridSteps && grid_threshold(i + 1) <= score) ++i;
  while (i > 0 && grid_threshold(i) > score) --i;
  return i;
}

}  // namespace

double grid_threshold(int i) {
  return static_cast<double>(i) / static_cast<double>(kRocGridSteps);
}

RocCurve roc_curve(const ScoredSet& s) {
  const ClassCounts counts = check_labels(s);
  // hist[i] counts samples whose highest passed threshold is grid point i; a
  // sample passes every threshold at or below that point.
  std::vector<std::size_t> pos_hist(kRocGridSteps + 1, 0);
  std::vector<std::size_t> neg_hist(kRocGridSteps + 1, 0);
  for (std::size_t k = 0; k < s.scores.size(); ++k) {
    const double clamped = std::clamp(s.scores[k], 0.0, 1.0);
    const int i = grid_index_at_or_below(clamped);
    (is_positive(s.labels[k]) ? pos_hist : neg_hist)[i]++;
  }

  RocCurve roc;
  roc.points.resize(kRocGridSteps + 1);
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (int i = kRocGridSteps; i >= 0; --i) {
    tp += pos_hist[i];
    fp += neg_hist[i];
    roc.points[i] = {grid_threshold(i),
                     static_cast<double>(fp) / static_cast<double>(counts.neg),
                     static_cast<double>(tp) / static_cast<double>(counts.pos)};
  }
  roc.auc = trapezoid_auc(roc.points);
  return roc;
}

double trapezoid_auc(std::span<const RocPoint> points) {
  std::vector<std::pair<double, double>> xy;
  xy.reserve(points.size() + 2);
  for (const auto& p : points) xy.emplace_back(p.fpr, p.tpr);
  xy.emplace_back(0.0, 0.0);
  xy.emplace_back(1.0, 1.0);
  std::sort(xy.begin(), xy.end());
  xy.erase(std::unique(xy.begin(), xy.end()), xy.end());
  double area = 0.0;
  for (std::size_t i = 1; i < xy.size(); ++i) {
    area += (xy[i].first - xy[i - 1].first) * (xy[i].second + xy[i - 1].second) / 2.0;
  }
  return area;
}

OperatingPoint specificity_at_sensitivity(const RocCurve& roc, double target_tpr) {
  if (!(target_tpr > 0.0 && target_tpr <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "target sensitivity must be in (0, 1]");
  }
  OperatingPoint best;
  bool found = false;
  for (const auto& p : roc.points) {
    if (p.tpr + kRateSlack < target_tpr) continue;
    const double spec = 1.0 - p.fpr;
    // Points are in increasing threshold order, so >= keeps the largest
    // threshold among equals.
    if (!found || spec >= best.specificity) {
      best = {spec, p.tpr, p.threshold};
      found = true;
    }
  }
  if (!found) {
    throw Error(ErrorCode::kUnattainable, "no grid threshold reaches the target TPR");
  }
  return best;
}

OperatingPoint specificity_at_sensitivity(const ScoredSet& s, double target_tpr) {
  return specificity_at_sensitivity(roc_curve(s), target_tpr);
}

double auc_pairwise_oracle(const ScoredSet& s) {
  const ClassCounts counts = check_labels(s);
  double wins = 0.0;
  for (std::size_t i = 0; i < s.scores.size(); ++i) {
    if (!is_positive(s.labels[i])) continue;
    for (std::size_t j = 0; j < s.scores.size(); ++j) {
      if (is_positive(s.labels[j])) continue;
      if (s.scores[i] > s.scores[j]) {
        wins += 1.0;
      } else if (s.scores[i] == s.scores[j]) {
        wins += 0.5;
      }
    }
  }
  return wins / (static_cast<double>(counts.pos) * static_cast<double>(counts.neg));
}

std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", fraction * 100.0);
  return buf;
}

std::string roc_csv(const RocCurve& roc) {
  std::string out = "threshold,fpr,tpr\n";
  out.reserve(roc.points.size() * 32);
  char buf[96];
  for (const auto& p : roc.points) {
    std::snprintf(buf, sizeof buf, "%.4f,%.9g,%.9g\n", p.threshold, p.fpr, p.tpr);
    out += buf;
  }
  return out;
}

MetricsSummary summarize(const ScoredSet& s, double target_tpr) {
  const RocCurve roc = roc_curve(s);
  const OperatingPoint op = specificity_at_sensitivity(roc, target_tpr);
  return {roc.auc, op.sensitivity, op.specificity, op.threshold};
}

std::string metrics_json(const MetricsSummary& m) {
  nlohmann::json j = {{"auc", m.auc},
                      {"sensitivity", m.sensitivity},
                      {"specificity", m.specificity},
                      {"threshold", m.threshold},
                      {"decision_rule", kDecisionRule}};
  return j.dump(2) + "\n";
}

}  // namespace coughscreen
