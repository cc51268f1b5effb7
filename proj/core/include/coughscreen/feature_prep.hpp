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

#ifndef COUGHSCREEN_FEATURE_PREP_HPP_
#define COUGHSCREEN_FEATURE_PREP_HPP_

#include <span>
#include <vector>

#include "coughscreen/dataset.hpp"
#include "coughscreen/embedding.hpp"
#include "coughscreen/matrix.hpp"

namespace coughscreen {

/// Per-column standardization statistics. std is the population standard
/// deviation (divisor N).
struct ScalerParams {
  std::vector<double> mean;
  std::vector<double> std;
  std::size_t fitted_on = 0;

  std::size_t dim() const { return mean.size(); }
};

/// Standardize, then optionally scale each vector to unit Euclidean norm.
struct FeaturePrep {
  ScalerParams scaler;
  bool l2_normalize = true;
};

/// Throws kTooFewSamples when there are fewer than two rows.
ScalerParams fit_scaler(const Matrix<double>& features);
inline ScalerParams fit_scaler(const Dataset& train) {
  return fit_scaler(train.features);
}

/// (x - mean) / std per column, std == 0 treated as 1; then division by the
/// Euclidean norm when l2 is set (a zero vector passes through).
/// Throws kDimensionMismatch.
std::vector<double> transform(std::span<const double> x,
                              const ScalerParams& scaler, bool l2);
FeatureVector transform(const FeatureVector& vec, const ScalerParams& scaler,
                        bool l2);

Matrix<double> transform_rows(const Matrix<double>& features,
                              const FeaturePrep& prep);
Dataset transform_dataset(const Dataset& data, const FeaturePrep& prep);

}  // namespace coughscreen

#endif  // COUGHSCREEN_FEATURE_PREP_HPP_
