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

#ifndef COUGHSCREEN_DATASET_HPP_
#define COUGHSCREEN_DATASET_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "coughscreen/matrix.hpp"

namespace coughscreen {

enum class Label : std::int8_t { kUnknown = -1, kNegative = 0, kPositive = 1 };

inline bool is_positive(Label l) { return l == Label::kPositive; }

/// Feature matrix with one labeled (or blind) row per recording.
struct Dataset {
  Matrix<double> features;
  std::vector<Label> labels;
  std::vector<std::string> ids;

  std::size_t size() const { return ids.size(); }
  std::size_t dim() const { return features.cols(); }

  bool fully_labeled() const;
  std::size_t count_positive() const;

  /// Row index of every id. Throws kInvalidArgument on duplicates.
  std::unordered_map<std::string, std::size_t> index() const;

  Dataset rows(std::span<const std::size_t> indices) const;

  /// Throws kMissingId for ids not present.
  Dataset select(std::span<const std::string> wanted) const;

  /// Checks shape agreement, unique ids and finite features.
  /// Throws kInvalidArgument or kNaNFeature.
  void validate() const;
};

struct ManifestEntry {
  std::string id;
  Label label = Label::kUnknown;
  /// Path to an EMB1 file (1 x D) or inline values.
  std::variant<std::filesystem::path, std::vector<double>> features;
};

/// Parses a dataset manifest: a JSON array of
/// {"id": str, "label": 0|1|null, "features": path-or-array}.
std::vector<ManifestEntry> parse_dataset_manifest(std::string_view json_text);

std::string dataset_manifest_json(std::span<const ManifestEntry> entries);

/// Loads a manifest and every feature file it references (relative paths
/// resolve against the manifest's directory). Throws kMissingFeatures when a
/// referenced file cannot be read and kDimensionMismatch when dimensions
/// disagree or a file is not a single row.
Dataset load_dataset(const std::filesystem::path& manifest_path);
Dataset build_dataset(std::span<const ManifestEntry> entries,
                      const std::filesystem::path& base_dir);

}  // namespace coughscreen

#endif  // COUGHSCREEN_DATASET_HPP_
