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

#include <cmath>

#include "json.hpp"

#include "coughscreen/error.hpp"
#include "coughscreen/forest.hpp"
#include "coughscreen/io.hpp"

namespace coughscreen {
namespace {

using nlohmann::json;

[[noreturn]] void corrupt(const std::string& what) {
  throw Error(ErrorCode::kCorruptModelFile, what);
}

json params_to_json(const ForestParams& p) {
  return {{"n_estimators", p.n_estimators},
          {"criterion", to_string(p.criterion)},
          {"max_features", p.max_features},
          {"min_samples_leaf", p.min_samples_leaf},
          {"min_samples_split", p.min_samples_split},
          {"bootstrap", p.bootstrap},
          {"split_mode", to_string(p.split_mode)},
          {"seed", p.seed}};
}

ForestParams params_from_json(const json& j) {
  ForestParams p;
  p.n_estimators = j.at("n_estimators").get<int>();
  p.criterion = parse_criterion(j.at("criterion").get<std::string>());
  p.max_features = j.at("max_features").get<double>();
  p.min_samples_leaf = j.at("min_samples_leaf").get<int>();
  p.min_samples_split = j.at("min_samples_split").get<int>();
  p.bootstrap = j.at("bootstrap").get<bool>();
  p.split_mode = parse_split_mode(j.at("split_mode").get<std::string>());
  p.seed = j.at("seed").get<std::uint64_t>();
  return p;
}

}  // namespace

std::string serialize_forest(const Forest& forest) {
  json trees = json::array();
  for (const auto& t : forest.trees) {
    json feature = json::array(), threshold = json::array(), left = json::array(),
         right = json::array(), leaf_value = json::array(), count = json::array();
    for (const auto& n : t.nodes) {
      feature.push_back(n.feature);
      threshold.push_back(n.threshold);
      left.push_back(n.left);
      right.push_back(n.right);
      leaf_value.push_back(n.leaf_value);
      count.push_back(n.count);
    }
    trees.push_back({{"feature", std::move(feature)},
                     {"threshold", std::move(threshold)},
                     {"left", std::move(left)},
                     {"right", std::move(right)},
                     {"leaf_value", std::move(leaf_value)},
                     {"count", std::move(count)}});
  }
  json doc = {
      {"format_version", kModelFormatVersion},
      {"params", params_to_json(forest.params)},
      {"scaler",
       {{"mean", forest.prep.scaler.mean},
        {"std", forest.prep.scaler.std},
        {"fitted_on", forest.prep.scaler.fitted_on},
        {"std_divisor", "population"},
        {"l2_normalize", forest.prep.l2_normalize}}},
      {"feature_dim", forest.feature_dim},
      {"decision_rule", "value <= threshold goes left"},
      {"trees", std::move(trees)},
  };
  return doc.dump() + "\n";
}

Forest load_forest(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    corrupt(std::string("model file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("format_version")) {
    corrupt("model file has no format_version");
  }
  if (!doc["format_version"].is_number_integer() ||
      doc["format_version"].get<std::int64_t>() != kModelFormatVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                "model format_version " + doc["format_version"].dump() +
                    " is not supported (expected " +
                    std::to_string(kModelFormatVersion) + ")");
  }

  Forest forest;
  try {
    forest.params = params_from_json(doc.at("params"));
    forest.params.validate();
    const json& scaler = doc.at("scaler");
    forest.prep.scaler.mean = scaler.at("mean").get<std::vector<double>>();
    forest.prep.scaler.std = scaler.at("std").get<std::vector<double>>();
    forest.prep.scaler.fitted_on = scaler.at("fitted_on").get<std::size_t>();
    forest.prep.l2_normalize = scaler.at("l2_normalize").get<bool>();
    forest.feature_dim = doc.at("feature_dim").get<std::size_t>();

    for (const json& jt : doc.at("trees")) {
      const auto feature = jt.at("feature").get<std::vector<std::int32_t>>();
      const auto threshold = jt.at("threshold").get<std::vector<double>>();
      const auto left = jt.at("left").get<std::vector<std::int32_t>>();
      const auto right = jt.at("right").get<std::vector<std::int32_t>>();
      const auto leaf_value = jt.at("leaf_value").get<std::vector<double>>();
      const auto count = jt.at("count").get<std::vector<std::uint32_t>>();
      const std::size_t n = feature.size();
      if (n == 0 || threshold.size() != n || left.size() != n ||
          right.size() != n || leaf_value.size() != n || count.size() != n) {
        corrupt("tree arrays are empty or of unequal length");
      }
      Tree tree;
      tree.nodes.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        TreeNode& node = tree.nodes[i];
        node = {feature[i], threshold[i], left[i], right[i], leaf_value[i], count[i]};
        if (node.is_leaf()) {
          if (!(node.leaf_value >= 0.0 && node.leaf_value <= 1.0)) {
            corrupt("leaf value outside [0, 1]");
          }
        } else {
          // Children always follow their parent, which also rules out cycles.
          const auto self = static_cast<std::int64_t>(i);
          if (static_cast<std::size_t>(node.feature) >= forest.feature_dim ||
              node.left <= self || node.right <= self ||
              static_cast<std::size_t>(node.left) >= n ||
              static_cast<std::size_t>(node.right) >= n ||
              !std::isfinite(node.threshold)) {
            corrupt("invalid internal node " + std::to_string(i));
          }
        }
      }
      forest.trees.push_back(std::move(tree));
    }
  } catch (const json::exception& e) {
    corrupt(std::string("model file is missing fields: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kCorruptModelFile) throw;
    corrupt(e.what());
  }

  if (forest.trees.size() != static_cast<std::size_t>(forest.params.n_estimators)) {
    corrupt("tree count disagrees with n_estimators");
  }
  const std::size_t sd = forest.prep.scaler.mean.size();
  if (forest.prep.scaler.std.size() != sd ||
      (sd != 0 && sd != forest.feature_dim)) {
    corrupt("scaler dimensions disagree with feature_dim");
  }
  return forest;
}

void save_forest(const std::filesystem::path& path, const Forest& forest) {
  write_file_text(path, serialize_forest(forest));
}

Forest read_forest(const std::filesystem::path& path) {
  return load_forest(read_file_text(path));
}

}  // namespace coughscreen
