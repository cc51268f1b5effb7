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

#include "coughscreen/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "coughscreen/embedding.hpp"
#include "coughscreen/error.hpp"
#include "coughscreen/io.hpp"

namespace coughscreen {
namespace fs = std::filesystem;
using nlohmann::json;

bool Dataset::fully_labeled() const {
  return std::none_of(labels.begin(), labels.end(),
                      [](Label l) { return l == Label::kUnknown; });
}

std::size_t Dataset::count_positive() const {
  return static_cast<std::size_t>(
      std::count(labels.begin(), labels.end(), Label::kPositive));
}

std::unordered_map<std::string, std::size_t> Dataset::index() const {
  std::unordered_map<std::string, std::size_t> out;
  out.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!out.emplace(ids[i], i).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate id '" + ids[i] + "'");
    }
  }
  return out;
}

Dataset Dataset::rows(std::span<const std::size_t> indices) const {
  Dataset out;
  out.features = Matrix<double>(indices.size(), dim());
  out.labels.reserve(indices.size());
  out.ids.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const std::size_t r = indices[i];
    std::copy_n(features.row(r).begin(), dim(), out.features.row(i).begin());
    out.labels.push_back(labels[r]);
    out.ids.push_back(ids[r]);
  }
  return out;
}

Dataset Dataset::select(std::span<const std::string> wanted) const {
  const auto idx = index();
  std::vector<std::size_t> picked;
  picked.reserve(wanted.size());
  for (const auto& id : wanted) {
    const auto it = idx.find(id);
    if (it == idx.end()) {
      throw Error(ErrorCode::kMissingId, "id '" + id + "' is not in the manifest");
    }
    picked.push_back(it->second);
  }
  return rows(picked);
}

void Dataset::validate() const {
  if (labels.size() != ids.size() || features.rows() != ids.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "dataset has mismatched feature, label and id counts");
  }
  index();
  for (std::size_t r = 0; r < features.rows(); ++r) {
    for (double v : features.row(r)) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kNaNFeature,
                    "non-finite feature in row '" + ids[r] + "'");
      }
    }
  }
}

std::vector<ManifestEntry> parse_dataset_manifest(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("dataset manifest is not valid JSON: ") + e.what());
  }
  if (!doc.is_array()) {
    throw Error(ErrorCode::kInvalidArgument, "dataset manifest must be an array");
  }
  std::vector<ManifestEntry> entries;
  entries.reserve(doc.size());
  for (const auto& item : doc) {
    ManifestEntry e;
    try {
      e.id = item.at("id").get<std::string>();
      const auto& label = item.contains("label") ? item.at("label") : json();
      if (label.is_null()) {
        e.label = Label::kUnknown;
      } else {
        const int v = label.get<int>();
        if (v != 0 && v != 1) {
          throw Error(ErrorCode::kInvalidArgument,
                      "label of '" + e.id + "' must be 0, 1 or null");
        }
        e.label = v == 1 ? Label::kPositive : Label::kNegative;
      }
      if (!item.contains("features") || item.at("features").is_null()) {
        throw Error(ErrorCode::kMissingFeatures, "no features listed for '" + e.id + "'");
      }
      const auto& feats = item.at("features");
      if (feats.is_string()) {
        e.features = fs::path(feats.get<std::string>());
      } else if (feats.is_array()) {
        e.features = feats.get<std::vector<double>>();
      } else {
        throw Error(ErrorCode::kInvalidArgument,
                    "features of '" + e.id + "' must be a path or an array");
      }
    } catch (const json::exception& ex) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string("bad dataset manifest entry: ") + ex.what());
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

std::string dataset_manifest_json(std::span<const ManifestEntry> entries) {
  json doc = json::array();
  for (const auto& e : entries) {
    json item;
    item["id"] = e.id;
    if (e.label == Label::kUnknown) {
      item["label"] = nullptr;
    } else {
      item["label"] = e.label == Label::kPositive ? 1 : 0;
    }
    if (const auto* p = std::get_if<fs::path>(&e.features)) {
      item["features"] = p->generic_string();
    } else {
      item["features"] = std::get<std::vector<double>>(e.features);
    }
    doc.push_back(std::move(item));
  }
  return doc.dump(1) + "\n";
}

Dataset build_dataset(std::span<const ManifestEntry> entries,
                      const fs::path& base_dir) {
  Dataset ds;
  ds.ids.reserve(entries.size());
  ds.labels.reserve(entries.size());
  std::vector<double> row;
  for (const auto& e : entries) {
    if (const auto* p = std::get_if<fs::path>(&e.features)) {
      const fs::path full = p->is_absolute() ? *p : base_dir / *p;
      Matrix<float> m;
      try {
        m = read_emb1(full);
      } catch (const Error& err) {
        throw Error(ErrorCode::kMissingFeatures,
                    "features for '" + e.id + "': " + err.what());
      }
      if (m.rows() != 1) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "features for '" + e.id + "' must be a single pooled row, got " +
                        std::to_string(m.rows()));
      }
      row.assign(m.data().begin(), m.data().end());
    } else {
      row = std::get<std::vector<double>>(e.features);
    }
    if (row.empty()) {
      throw Error(ErrorCode::kMissingFeatures, "features for '" + e.id + "' are empty");
    }
    if (!ds.ids.empty() && row.size() != ds.features.cols()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "features for '" + e.id + "' have " + std::to_string(row.size()) +
                      " dims, expected " + std::to_string(ds.features.cols()));
    }
    ds.features.append_row(row);
    ds.ids.push_back(e.id);
    ds.labels.push_back(e.label);
  }
  ds.validate();
  return ds;
}

Dataset load_dataset(const fs::path& manifest_path) {
  const auto entries = parse_dataset_manifest(read_file_text(manifest_path));
  return build_dataset(entries, manifest_path.parent_path());
}

}  // namespace coughscreen
