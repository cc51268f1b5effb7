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

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "coughscreen/embedding.hpp"
#include "coughscreen/io.hpp"
#include "test_support.hpp"

namespace coughscreen {
namespace {

using testing::TempDir;

TEST(DatasetManifest, ParsesLabelsAndFeatureForms) {
  const auto entries = parse_dataset_manifest(R"([
    {"id": "a", "label": 1, "features": [1.5, 2.5]},
    {"id": "b", "label": 0, "features": "feat/b.emb"},
    {"id": "c", "label": null, "features": [0, 0]}])");
  ASSERT_EQ(entries.size(), 3u);
  EXPECT_EQ(entries[0].label, Label::kPositive);
  EXPECT_EQ(entries[1].label, Label::kNegative);
  EXPECT_EQ(entries[2].label, Label::kUnknown);
  EXPECT_EQ(std::get<std::vector<double>>(entries[0].features), (std::vector<double>{1.5, 2.5}));
  EXPECT_EQ(std::get<std::filesystem::path>(entries[1].features), "feat/b.emb");
}

TEST(DatasetManifest, RoundTripsThroughJson) {
  std::vector<ManifestEntry> in = {{"x", Label::kPositive, std::vector<double>{0.1, 1e-300}},
                                   {"y", Label::kUnknown, std::filesystem::path("f/y.emb")}};
  const auto out = parse_dataset_manifest(dataset_manifest_json(in));
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].id, "x");
  EXPECT_EQ(std::get<std::vector<double>>(out[0].features), (std::vector<double>{0.1, 1e-300}));
  EXPECT_EQ(out[1].label, Label::kUnknown);
}

TEST(DatasetManifest, Rejections) {
  EXPECT_ERROR_CODE(parse_dataset_manifest("{}"), ErrorCode::kInvalidArgument);
  EXPECT_ERROR_CODE(parse_dataset_manifest("[{"), ErrorCode::kInvalidArgument);
  EXPECT_ERROR_CODE(parse_dataset_manifest(R"([{"id":"a","label":2,"features":[1]}])"),
                    ErrorCode::kInvalidArgument);
  EXPECT_ERROR_CODE(parse_dataset_manifest(R"([{"label":1,"features":[1]}])"),
                    ErrorCode::kInvalidArgument);
  EXPECT_ERROR_CODE(parse_dataset_manifest(R"([{"id":"a","label":1}])"),
                    ErrorCode::kMissingFeatures);
}

TEST(BuildDataset, LoadsEmbFilesRelativeToManifest) {
  TempDir dir("ds");
  write_emb1(dir / "feat" / "b.emb", Matrix<float>(1, 2, std::vector<float>{3.0f, 4.0f}));
  write_file_text(dir / "m.json", R"([
    {"id": "a", "label": 1, "features": [1, 2]},
    {"id": "b", "label": 0, "features": "feat/b.emb"}])");
  const Dataset d = load_dataset(dir / "m.json");
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.dim(), 2u);
  EXPECT_EQ(d.features(1, 1), 4.0);
  EXPECT_EQ(d.count_positive(), 1u);
  EXPECT_TRUE(d.fully_labeled());
}

TEST(BuildDataset, Errors) {
  TempDir dir("ds");
  write_emb1(dir / "two_rows.emb", Matrix<float>(2, 2, 1.0f));
  write_file_text(dir / "missing.json", R"([{"id":"a","label":1,"features":"nope.emb"}])");
  EXPECT_ERROR_CODE(load_dataset(dir / "missing.json"), ErrorCode::kMissingFeatures);
  write_file_text(dir / "rows.json", R"([{"id":"a","label":1,"features":"two_rows.emb"}])");
  EXPECT_ERROR_CODE(load_dataset(dir / "rows.json"), ErrorCode::kDimensionMismatch);
  write_file_text(dir / "dims.json", R"([{"id":"a","label":1,"features":[1,2]},
                                         {"id":"b","label":0,"features":[1]}])");
  EXPECT_ERROR_CODE(load_dataset(dir / "dims.json"), ErrorCode::kDimensionMismatch);
  write_file_text(dir / "dup.json", R"([{"id":"a","label":1,"features":[1]},
                                        {"id":"a","label":0,"features":[2]}])");
  EXPECT_ERROR_CODE(load_dataset(dir / "dup.json").index(), ErrorCode::kInvalidArgument);
}

TEST(Dataset, SelectAndRows) {
  const Dataset d = testing::make_dataset({{1}, {2}, {3}, {4}}, {0, 1, 0, 1});
  const std::vector<std::string> want = {"r3", "r0"};
  const Dataset s = d.select(want);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s.ids, want);
  EXPECT_EQ(s.features(0, 0), 4.0);
  EXPECT_EQ(s.labels[0], Label::kPositive);
  const std::vector<std::string> missing = {"r9"};
  EXPECT_ERROR_CODE(d.select(missing), ErrorCode::kMissingId);
  const std::vector<std::size_t> idx = {2};
  EXPECT_EQ(d.rows(idx).ids.front(), "r2");
}

TEST(Dataset, ValidateRejectsNonFinite) {
  Dataset d = testing::make_dataset({{1, 2}, {3, 4}}, {0, 1});
  EXPECT_NO_THROW(d.validate());
  d.features(1, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_ERROR_CODE(d.validate(), ErrorCode::kNaNFeature);
  d.features(1, 0) = std::numeric_limits<double>::infinity();
  EXPECT_ERROR_CODE(d.validate(), ErrorCode::kNaNFeature);
}

}  // namespace
}  // namespace coughscreen
