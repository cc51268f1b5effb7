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

#ifndef COUGHSCREEN_TSNE_HPP_
#define COUGHSCREEN_TSNE_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "coughscreen/dataset.hpp"
#include "coughscreen/matrix.hpp"

namespace coughscreen {

struct TsneConfig {
  double perplexity = 30.0;
  int iterations = 1000;
  double learning_rate = 200.0;
  double early_exaggeration = 12.0;
  int exaggeration_iterations = 250;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  int momentum_switch_iteration = 250;
  std::uint64_t seed = 42;
  unsigned jobs = 1;

  /// Throws kInvalidArgument for an impossible configuration on n points.
  void validate(std::size_t n) const;
};

inline constexpr int kTsneOutputDim = 2;
inline constexpr int kPerplexityMaxSteps = 64;
inline constexpr double kPerplexityTolerance = 1e-5;
inline constexpr double kAffinityFloor = 1e-12;

struct Projection {
  /// N x 2.
  Matrix<double> coords;
  /// kl_history[t] is KL(P || Q) after t updates, so the vector has
  /// iterations + 1 entries.
  std::vector<double> kl_history;
  std::vector<std::string> ids;
  std::vector<Label> labels;
};

/// Squared Euclidean distances between rows.
Matrix<double> squared_distances(const Matrix<double>& x, unsigned jobs = 1);

/// Row-conditional affinities p_{j|i}, each row tuned by bisection on its
/// precision until its entropy is log2(perplexity). Throws
/// kDegenerateDistances when a row has no nonzero distance.
Matrix<double> conditional_affinities(const Matrix<double>& distances_sq,
                                      double perplexity);

/// Symmetrized joint affinities (p_{j|i} + p_{i|j}) / 2N, floored.
Matrix<double> perplexity_calibrate(const Matrix<double>& distances_sq,
                                    double perplexity);

/// Exact t-SNE of the rows of `features`.
Projection tsne(const Matrix<double>& features, const TsneConfig& cfg);
Projection tsne(const Dataset& data, const TsneConfig& cfg);

/// "id,x,y,label"; coordinates with nine significant digits, unknown labels
/// left empty.
std::string scatter_csv(const Projection& proj);
void export_scatter(const Projection& proj, const std::filesystem::path& path);
/// "iter,kl".
std::string kl_history_csv(const Projection& proj);

}  // namespace coughscreen

#endif  // COUGHSCREEN_TSNE_HPP_
