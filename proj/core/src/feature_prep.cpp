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

#include "coughscreen/feature_prep.hpp"

#include <cmath>

#include "coughscreen/error.hpp"

namespace coughscreen {

ScalerParams fit_scaler(const Matrix<double>& features) {
  const std::size_t n = features.rows();
  if (n < 2) {
    throw Error(ErrorCode::kTooFewSamples,
                "scaler needs at least 2 rows, got " + std::to_string(n));
  }
  const std::size_t d = features.cols();
  // Welford's single-pass update.
  std::vector<double> mean(d, 0.0);
  std::vector<double> m2(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = features.row(r);
    const double count = static_cast<double>(r + 1);
    for (std::size_t c = 0; c < d; ++c) {
      const double delta = row[c] - mean[c];
      mean[c] += delta / count;
      m2[c] += delta * (row[c] - mean[c]);
    }
  }
  ScalerParams p;
  p.mean = std::move(mean);
  p.std.resize(d);
  for (std::size_t c = 0; c < d; ++c) {
    p.std[c] = std::sqrt(std::max(0.0, m2[c] / static_cast<double>(n)));
  }
  p.fitted_on = n;
  return p;
}

std::vector<double> transform(std::span<const double> x,
                              const ScalerParams& scaler, bool l2) {
  if (x.size() != scaler.dim() || scaler.std.size() != scaler.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "vector has " + std::to_string(x.size()) +
                    " dims, scaler expects " + std::to_string(scaler.dim()));
  }
  std::vector<double> out(x.size());
  for (std::size_t c = 0; c < x.size(); ++c) {
    const double s = scaler.std[c] == 0.0 ? 1.0 : scaler.std[c];
    out[c] = (x[c] - scaler.mean[c]) / s;
  }
  if (l2) {
    double sq = 0.0;
    for (double v : out) sq += v * v;
    if (sq > 0.0) {
      const double norm = std::sqrt(sq);
      for (double& v : out) v /= norm;
    }
  }
  return out;
}

FeatureVector transform(const FeatureVector& vec, const ScalerParams& scaler,
                        bool l2) {
  return {vec.file_id, transform(vec.values, scaler, l2)};
}

Matrix<double> transform_rows(const Matrix<double>& features,
                              const FeaturePrep& prep) {
  Matrix<double> out(features.rows(), features.cols());
  for (std::size_t r = 0; r < features.rows(); ++r) {
    const auto t = transform(features.row(r), prep.scaler, prep.l2_normalize);
    std::copy(t.begin(), t.end(), out.row(r).begin());
  }
  return out;
}

Dataset transform_dataset(const Dataset& data, const FeaturePrep& prep) {
  Dataset out;
  out.features = transform_rows(data.features, prep);
  out.labels = data.labels;
  out.ids = data.ids;
  return out;
}

}  // namespace coughscreen
