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
#include <sstream>

#include "coughscreen/error.hpp"
#include "coughscreen/parallel.hpp"
#include "coughscreen/rng.hpp"

namespace coughscreen {
namespace {

// Gains this close to zero are rounding noise around an exact zero.
constexpr double kGainEpsilon = 1e-12;

struct Candidate {
  std::int32_t feature = -1;
  double threshold = 0.0;
  double gain = -std::numeric_limits<double>::infinity();
};

/// Grows one tree. Features are stored column-major so that scanning one
/// feature over a node's samples is contiguous.
class TreeBuilder {
 public:
  TreeBuilder(const std::vector<double>& columns, std::size_t n_rows,
              std::size_t dim, const std::vector<std::uint8_t>& positive,
              const ForestParams& params, std::uint64_t seed)
      : columns_(columns),
        n_rows_(n_rows),
        dim_(dim),
        positive_(positive),
        params_(params),
        k_(features_per_split(params.max_features, dim)),
        rng_(seed) {
    perm_.resize(dim_);
    std::iota(perm_.begin(), perm_.end(), 0);
  }

  Tree build(TrainingStats& stats) {
    std::vector<std::uint32_t> samples;
    if (params_.bootstrap) {
      samples.resize(n_rows_);
      for (auto& s : samples) s = static_cast<std::uint32_t>(rng_.below(n_rows_));
    } else {
      samples.resize(n_rows_);
      std::iota(samples.begin(), samples.end(), 0u);
    }
    samples_ = std::move(samples);

    Tree tree;
    tree.nodes.emplace_back();
    struct Work {
      std::size_t begin, end;
      std::int32_t node;
    };
    std::vector<Work> stack{{0, samples_.size(), 0}};
    while (!stack.empty()) {
      const Work w = stack.back();
      stack.pop_back();
      const std::size_t n = w.end - w.begin;
      std::size_t pos = 0;
      for (std::size_t i = w.begin; i < w.end; ++i) pos += positive_[samples_[i]];

      Candidate best;
      const bool can_split = n >= static_cast<std::size_t>(params_.min_samples_split) &&
                             pos != 0 && pos != n && !all_constant(w.begin, w.end);
      if (can_split) best = find_split(w.begin, w.end, pos);

      TreeNode& node = tree.nodes[w.node];
      node.count = static_cast<std::uint32_t>(n);
      if (best.feature < 0) {
        node.leaf_value = static_cast<double>(pos) / static_cast<double>(n);
        ++stats.leaves;
        continue;
      }
      if (best.gain < 0.0) {
        throw Error(ErrorCode::kInternal, "accepted split with negative gain");
      }
      stats.min_accepted_gain = std::min(stats.min_accepted_gain, best.gain);
      ++stats.internal_nodes;

      const double* col = column(best.feature);
      const auto mid = std::stable_partition(
          samples_.begin() + w.begin, samples_.begin() + w.end,
          [&](std::uint32_t s) { return col[s] <= best.threshold; });
      const std::size_t split = static_cast<std::size_t>(mid - samples_.begin());

      const auto left = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      const auto right = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      TreeNode& parent = tree.nodes[w.node];
      parent.feature = best.feature;
      parent.threshold = best.threshold;
      parent.left = left;
      parent.right = right;
      // Right first so the left subtree is expanded first.
      stack.push_back({split, w.end, right});
      stack.push_back({w.begin, split, left});
    }
    return tree;
  }

 private:
  const double* column(std::size_t f) const { return columns_.data() + f * n_rows_; }

  bool all_constant(std::size_t begin, std::size_t end) const {
    for (std::size_t f = 0; f < dim_; ++f) {
      const double* col = column(f);
      const double first = col[samples_[begin]];
      for (std::size_t i = begin + 1; i < end; ++i) {
        if (col[samples_[i]] != first) return false;
      }
    }
    return true;
  }

  double gain_of(std::size_t n, std::size_t pos, std::size_t n_left,
                 std::size_t pos_left) const {
    const std::size_t n_right = n - n_left;
    const std::size_t pos_right = pos - pos_left;
    const double dn = static_cast<double>(n);
    double g = impurity(params_.criterion, pos, n - pos) -
               (static_cast<double>(n_left) / dn) *
                   impurity(params_.criterion, pos_left, n_left - pos_left) -
               (static_cast<double>(n_right) / dn) *
                   impurity(params_.criterion, pos_right, n_right - pos_right);
    if (std::abs(g) < kGainEpsilon) g = 0.0;
    return g;
  }

  bool leaf_sizes_ok(std::size_t n_left, std::size_t n) const {
    const auto min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);
    return n_left >= min_leaf && n - n_left >= min_leaf;
  }

  Candidate find_split(std::size_t begin, std::size_t end, std::size_t pos) {
    Candidate best;
    for (std::size_t i = 0; i < k_; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng_.below(dim_ - i));
      std::swap(perm_[i], perm_[j]);
      const std::size_t f = perm_[i];
      const double* col = column(f);

      double lo = col[samples_[begin]];
      double hi = lo;
      for (std::size_t s = begin + 1; s < end; ++s) {
        const double v = col[samples_[s]];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (!(lo < hi)) continue;

      Candidate c = params_.split_mode == SplitMode::kRandom
                        ? random_split(col, begin, end, pos, lo, hi)
                        : best_split(col, begin, end, pos);
      if (c.feature < 0) continue;
      if (c.gain > best.gain) {
        best = c;
        best.feature = static_cast<std::int32_t>(f);
      }
    }
    return best;
  }

  Candidate random_split(const double* col, std::size_t begin, std::size_t end,
                         std::size_t pos, double lo, double hi) {
    const double threshold = lo + rng_.uniform_open() * (hi - lo);
    std::size_t n_left = 0;
    std::size_t pos_left = 0;
    for (std::size_t s = begin; s < end; ++s) {
      const std::uint32_t idx = samples_[s];
      if (col[idx] <= threshold) {
        ++n_left;
        pos_left += positive_[idx];
      }
    }
    const std::size_t n = end - begin;
    Candidate c;
    if (!leaf_sizes_ok(n_left, n)) return c;
    c.feature = 0;
    c.threshold = threshold;
    c.gain = gain_of(n, pos, n_left, pos_left);
    return c;
  }

  Candidate best_split(const double* col, std::size_t begin, std::size_t end,
                       std::size_t pos) {
    sorted_.clear();
    for (std::size_t s = begin; s < end; ++s) {
      const std::uint32_t idx = samples_[s];
      sorted_.emplace_back(col[idx], positive_[idx]);
    }
    std::sort(sorted_.begin(), sorted_.end());
    const std::size_t n = sorted_.size();
    Candidate c;
    std::size_t pos_left = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      pos_left += sorted_[i].second;
      const double a = sorted_[i].first;
      const double b = sorted_[i + 1].first;
      if (!(a < b)) continue;
      const std::size_t n_left = i + 1;
      if (!leaf_sizes_ok(n_left, n)) continue;
      const double g = gain_of(n, pos, n_left, pos_left);
      if (g > c.gain) {
        double mid = a + (b - a) / 2.0;
        if (!(mid < b)) mid = a;
        c.feature = 0;
        c.threshold = mid;
        c.gain = g;
      }
    }
    return c;
  }

  const std::vector<double>& columns_;
  std::size_t n_rows_;
  std::size_t dim_;
  const std::vector<std::uint8_t>& positive_;
  const ForestParams& params_;
  std::size_t k_;
  Rng rng_;
  std::vector<std::size_t> perm_;
  std::vector<std::uint32_t> samples_;
  std::vector<std::pair<double, std::uint8_t>> sorted_;
};

}  // namespace

std::string_view to_string(Criterion c) {
  return c == Criterion::kEntropy ? "entropy" : "gini";
}

std::string_view to_string(SplitMode m) {
  return m == SplitMode::kRandom ? "random" : "best";
}

Criterion parse_criterion(std::string_view s) {
  if (s == "entropy") return Criterion::kEntropy;
  if (s == "gini") return Criterion::kGini;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown criterion '" + std::string(s) + "'");
}

SplitMode parse_split_mode(std::string_view s) {
  if (s == "random") return SplitMode::kRandom;
  if (s == "best") return SplitMode::kBest;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown split mode '" + std::string(s) + "'");
}

void ForestParams::validate() const {
  auto bad = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, "forest params: " + what);
  };
  if (n_estimators < 1) bad("n_estimators must be positive");
  if (!(max_features > 0.0 && max_features <= 1.0)) {
    bad("max_features must be in (0, 1]");
  }
  if (min_samples_leaf < 1) bad("min_samples_leaf must be positive");
  if (min_samples_split < 2) bad("min_samples_split must be at least 2");
}

std::string describe(const ForestParams& p) {
  std::ostringstream os;
  os << "bootstrap=" << (p.bootstrap ? "true" : "false")
     << " criterion=" << to_string(p.criterion)
     << " max_features=" << p.max_features
     << " min_samples_leaf=" << p.min_samples_leaf
     << " min_samples_split=" << p.min_samples_split
     << " n_estimators=" << p.n_estimators
     << " split_mode=" << to_string(p.split_mode);
  return os.str();
}

std::string parameter_block(const ForestParams& p) {
  const std::string indent(21, ' ');
  std::ostringstream os;
  os << "ExtraTreesClassifier(bootstrap=" << (p.bootstrap ? "True" : "False") << ",\n"
     << indent << "criterion=" << to_string(p.criterion) << ",\n"
     << indent << "max_features=" << p.max_features << ",\n"
     << indent << "min_samples_leaf=" << p.min_samples_leaf << ",\n"
     << indent << "min_samples_split=" << p.min_samples_split << ",\n"
     << indent << "n_estimators=" << p.n_estimators << ")\n";
  if (p.split_mode != SplitMode::kRandom) {
    os << "split_mode=" << to_string(p.split_mode) << "\n";
  }
  return os.str();
}

std::size_t features_per_split(double max_features, std::size_t dim) {
  const auto k = static_cast<std::size_t>(
      std::floor(max_features * static_cast<double>(dim)));
  return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(dim, 1));
}

double entropy(std::size_t pos, std::size_t neg) {
  const double n = static_cast<double>(pos + neg);
  if (n == 0.0) return 0.0;
  double h = 0.0;
  for (std::size_t c : {pos, neg}) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

double gini(std::size_t pos, std::size_t neg) {
  const double n = static_cast<double>(pos + neg);
  if (n == 0.0) return 0.0;
  const double p = static_cast<double>(pos) / n;
  const double q = static_cast<double>(neg) / n;
  return 1.0 - p * p - q * q;
}

double impurity(Criterion c, std::size_t pos, std::size_t neg) {
  return c == Criterion::kEntropy ? entropy(pos, neg) : gini(pos, neg);
}

std::size_t Tree::leaf_for(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const TreeNode& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold
                                     ? n.left
                                     : n.right);
  }
  return i;
}

Forest train_forest(const Dataset& data, const ForestParams& params,
                    TrainingStats* stats, unsigned jobs) {
  params.validate();
  const std::size_t n = data.size();
  const std::size_t dim = data.dim();
  if (data.features.rows() != n || data.labels.size() != n) {
    throw Error(ErrorCode::kInvalidArgument, "dataset shape mismatch");
  }
  if (dim == 0) throw Error(ErrorCode::kInvalidArgument, "dataset has no features");
  if (n < static_cast<std::size_t>(params.min_samples_split)) {
    throw Error(ErrorCode::kTooFewSamples,
                "need at least min_samples_split=" +
                    std::to_string(params.min_samples_split) + " rows");
  }
  if (!data.fully_labeled()) {
    throw Error(ErrorCode::kLabelMissing, "training rows must all be labeled");
  }
  const std::size_t pos = data.count_positive();
  if (pos == 0 || pos == n) {
    throw Error(ErrorCode::kSingleClassData, "training labels contain one class");
  }

  std::vector<double> columns(n * dim);
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = data.features.row(r);
    for (std::size_t c = 0; c < dim; ++c) {
      if (!std::isfinite(row[c])) {
        throw Error(ErrorCode::kNaNFeature,
                    "non-finite feature " + std::to_string(c) + " in row " +
                        std::to_string(r));
      }
      columns[c * n + r] = row[c];
    }
  }
  std::vector<std::uint8_t> positive(n);
  for (std::size_t r = 0; r < n; ++r) positive[r] = is_positive(data.labels[r]);

  Forest forest;
  forest.params = params;
  forest.feature_dim = dim;
  forest.trees.resize(static_cast<std::size_t>(params.n_estimators));
  std::vector<TrainingStats> per_tree(forest.trees.size());
  parallel_for(forest.trees.size(), jobs, [&](std::size_t t) {
    TreeBuilder builder(columns, n, dim, positive, params,
                        derive_seed(params.seed, "tree", t));
    forest.trees[t] = builder.build(per_tree[t]);
  });
  if (stats) {
    for (const auto& s : per_tree) {
      stats->internal_nodes += s.internal_nodes;
      stats->leaves += s.leaves;
      stats->min_accepted_gain = std::min(stats->min_accepted_gain, s.min_accepted_gain);
    }
  }
  return forest;
}

double predict_proba(const Forest& forest, std::span<const double> x) {
  if (x.size() != forest.feature_dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                "vector has " + std::to_string(x.size()) + " dims, model expects " +
                    std::to_string(forest.feature_dim));
  }
  if (forest.trees.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& t : forest.trees) sum += t.predict(x);
  return std::clamp(sum / static_cast<double>(forest.trees.size()), 0.0, 1.0);
}

double score_raw(const Forest& forest, std::span<const double> raw) {
  if (forest.prep.scaler.dim() == 0) {
    if (!forest.prep.l2_normalize) return predict_proba(forest, raw);
    ScalerParams identity;
    identity.mean.assign(raw.size(), 0.0);
    identity.std.assign(raw.size(), 1.0);
    return predict_proba(forest, transform(raw, identity, true));
  }
  return predict_proba(forest,
                       transform(raw, forest.prep.scaler, forest.prep.l2_normalize));
}

}  // namespace coughscreen
