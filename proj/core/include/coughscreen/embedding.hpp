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

#ifndef COUGHSCREEN_EMBEDDING_HPP_
#define COUGHSCREEN_EMBEDDING_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "coughscreen/matrix.hpp"

namespace coughscreen {

/// Output dimensions of the two built-in backends, in concatenation order.
inline constexpr std::size_t kEnvironmentalEmbeddingDim = 6144;
inline constexpr std::size_t kTaggingEmbeddingDim = 1024;
inline constexpr std::size_t kFeatureDim =
    kEnvironmentalEmbeddingDim + kTaggingEmbeddingDim;

/// Per-frame embeddings of one recording from one backend (T x D).
struct EmbeddingMatrix {
  Matrix<float> values;
  std::string backend_id;
};

/// Pooled descriptor of one recording.
struct FeatureVector {
  std::string file_id;
  std::vector<double> values;
};

// EMB1 container: "EMB1", u32 LE rows, u32 LE cols, rows*cols f32 LE,
// row-major. Nothing may follow the payload.
std::vector<std::uint8_t> encode_emb1(const Matrix<float>& m);
/// Throws kUnreadableFile on bad magic, truncation or trailing bytes.
Matrix<float> decode_emb1(std::span<const std::uint8_t> bytes);
void write_emb1(const std::filesystem::path& path, const Matrix<float>& m);
Matrix<float> read_emb1(const std::filesystem::path& path);

/// Column-wise mean of each matrix, concatenated in the given order.
/// Throws kEmptyMatrix for an empty list or a matrix without rows.
FeatureVector pool_and_concat(std::span<const EmbeddingMatrix> mats,
                              std::string file_id);

}  // namespace coughscreen

#endif  // COUGHSCREEN_EMBEDDING_HPP_
