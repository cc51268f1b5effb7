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
#include <limits>

#include <gtest/gtest.h>

#include "coughscreen/backend.hpp"
#include "coughscreen/embedding.hpp"
#include "coughscreen/io.hpp"
#include "test_support.hpp"

namespace coughscreen {
namespace {

using testing::TempDir;

Matrix<float> filled(std::size_t rows, std::size_t cols, float base) {
  Matrix<float> m(rows, cols);
  for (std::size_t i = 0; i < m.data().size(); ++i) {
    m.data()[i] = base + static_cast<float>(i % 97) * 0.25f;
  }
  return m;
}

AudioClip silence(std::uint32_t rate, double seconds) {
  AudioClip c;
  c.sample_rate = rate;
  c.original_sample_rate = rate;
  c.samples.assign(static_cast<std::size_t>(std::lround(rate * seconds)), 0.0f);
  return c;
}

// Emits one row per started second of the (already padded) input and
// records the length it was given.
class CountingBackend final : public EmbeddingBackend {
 public:
  CountingBackend(std::size_t dim, std::uint32_t rate, std::size_t emit_dim = 0)
      : emit_dim_(emit_dim ? emit_dim : dim) {
    info_ = {"counting", dim, rate, BackendSource::kInterchangeModel};
  }
  const BackendInfo& info() const override { return info_; }
  Matrix<float> embed(const AudioClip& clip, std::string_view) const override {
    seen_samples = clip.samples.size();
    seen_rate = clip.sample_rate;
    const auto rows = static_cast<std::size_t>(std::ceil(clip.duration_seconds()));
    return Matrix<float>(rows, emit_dim_, 0.5f);
  }
  mutable std::size_t seen_samples = 0;
  mutable std::uint32_t seen_rate = 0;

 private:
  BackendInfo info_;
  std::size_t emit_dim_;
};

class FakeSession final : public InferenceSession {
 public:
  explicit FakeSession(Tensor t, bool fail = false) : tensor_(std::move(t)), fail_(fail) {}
  Tensor run(std::span<const float>) const override {
    if (fail_) throw std::runtime_error("kernel exploded");
    return tensor_;
  }

 private:
  Tensor tensor_;
  bool fail_;
};

TEST(Emb1, HeaderLayout) {
  Matrix<float> m(2, 3, 0.0f);
  m(0, 0) = 1.0f;
  const auto bytes = encode_emb1(m);
  ASSERT_EQ(bytes.size(), 12u + 6u * 4u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "EMB1");
  EXPECT_EQ(load_u32_le(bytes.data() + 4), 2u);
  EXPECT_EQ(load_u32_le(bytes.data() + 8), 3u);
  // 1.0f is 0x3f800000, little-endian.
  EXPECT_EQ(bytes[12], 0x00);
  EXPECT_EQ(bytes[15], 0x3f);
  EXPECT_EQ(bytes[14], 0x80);
}

TEST(Emb1, RoundTrip) {
  TempDir dir("emb");
  const Matrix<float> m = filled(5, 7, -3.0f);
  write_emb1(dir / "a.emb", m);
  EXPECT_TRUE(read_emb1(dir / "a.emb") == m);
}

TEST(Emb1, RejectsBadMagicAndSize) {
  auto bytes = encode_emb1(filled(2, 2, 0.0f));
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_ERROR_CODE(decode_emb1(bad), ErrorCode::kUnreadableFile);
  bytes.pop_back();
  EXPECT_ERROR_CODE(decode_emb1(bytes), ErrorCode::kUnreadableFile);
  EXPECT_ERROR_CODE(decode_emb1(std::vector<std::uint8_t>{'E', 'M'}), ErrorCode::kUnreadableFile);
}

TEST(PoolAndConcat, SingleRowsConcatenate) {
  std::vector<EmbeddingMatrix> mats = {{Matrix<float>(1, 2, std::vector<float>{1, 2}), "a"},
                                       {Matrix<float>(1, 3, std::vector<float>{3, 4, 5}), "b"}};
  const FeatureVector fv = pool_and_concat(mats, "rec");
  EXPECT_EQ(fv.file_id, "rec");
  EXPECT_EQ(fv.values, (std::vector<double>{1, 2, 3, 4, 5}));
}

TEST(PoolAndConcat, ColumnMean) {
  std::vector<EmbeddingMatrix> mats = {{Matrix<float>(2, 2, std::vector<float>{0, 2, 2, 0}), "a"}};
  EXPECT_EQ(pool_and_concat(mats, "x").values, (std::vector<double>{1, 1}));
}

TEST(PoolAndConcat, BuiltInDimensions) {
  std::vector<EmbeddingMatrix> mats = {{filled(3, kEnvironmentalEmbeddingDim, 0.0f), "env"},
                                       {filled(2, kTaggingEmbeddingDim, 1.0f), "tag"}};
  const FeatureVector fv = pool_and_concat(mats, "x");
  ASSERT_EQ(fv.values.size(), kFeatureDim);
  EXPECT_EQ(kFeatureDim, 7168u);
  // Positions 0..6143 come from the first backend, the rest from the second.
  for (std::size_t b = 0; b < mats.size(); ++b) {
    const Matrix<float>& m = mats[b].values;
    const std::size_t offset = b == 0 ? 0 : kEnvironmentalEmbeddingDim;
    for (std::size_t c = 0; c < m.cols(); c += 511) {
      double sum = 0.0;
      for (std::size_t r = 0; r < m.rows(); ++r) sum += m(r, c);
      ASSERT_NEAR(fv.values[offset + c], sum / static_cast<double>(m.rows()), 1e-12);
    }
  }
}

TEST(PoolAndConcat, RowPermutationInvariant) {
  Matrix<float> a(3, 2, std::vector<float>{1, 2, 3, 4, 5, 6});
  Matrix<float> b(3, 2, std::vector<float>{5, 6, 1, 2, 3, 4});
  std::vector<EmbeddingMatrix> ma = {{a, "a"}}, mb = {{b, "a"}};
  EXPECT_EQ(pool_and_concat(ma, "x").values, pool_and_concat(mb, "x").values);
}

TEST(PoolAndConcat, EmptyInputs) {
  EXPECT_ERROR_CODE(pool_and_concat({}, "x"), ErrorCode::kEmptyMatrix);
  std::vector<EmbeddingMatrix> mats = {{Matrix<float>(0, 4), "a"}};
  EXPECT_ERROR_CODE(pool_and_concat(mats, "x"), ErrorCode::kEmptyMatrix);
}

TEST(Embed, OneSecondClipGivesOneRow) {
  CountingBackend b(kTaggingEmbeddingDim, 16000);
  const EmbeddingMatrix m = embed(b, silence(16000, 1.0), "r");
  EXPECT_EQ(m.values.rows(), 1u);
  EXPECT_EQ(m.values.cols(), 1024u);
  EXPECT_EQ(m.backend_id, "counting");
}

TEST(Embed, ShortClipIsPaddedToOneSecond) {
  CountingBackend b(kTaggingEmbeddingDim, 16000);
  const EmbeddingMatrix m = embed(b, silence(16000, 0.4), "r");
  EXPECT_EQ(b.seen_samples, 16000u);
  EXPECT_EQ(m.values.rows(), 1u);
}

TEST(Embed, ResamplesToBackendRate) {
  CountingBackend b(kEnvironmentalEmbeddingDim, 48000);
  const EmbeddingMatrix m = embed(b, silence(44100, 2.5), "r");
  EXPECT_EQ(b.seen_rate, 48000u);
  EXPECT_NEAR(static_cast<double>(b.seen_samples), 120000.0, 1.0);
  EXPECT_EQ(m.values.rows(), 3u);
}

TEST(Embed, WrongWidthIsDimensionMismatch) {
  CountingBackend b(kTaggingEmbeddingDim, 16000, 1000);
  EXPECT_ERROR_CODE(embed(b, silence(16000, 1.0), "r"), ErrorCode::kDimensionMismatch);
}

TEST(Embed, AudioBackendNeedsAudio) {
  CountingBackend b(8, 16000);
  EXPECT_ERROR_CODE(embed(b, AudioClip{}, "r"), ErrorCode::kEmptyAudio);
}

TEST(PrecomputedBackend, ReplaysStoredFile) {
  TempDir dir("emb");
  const Matrix<float> stored = filled(4, kTaggingEmbeddingDim, 2.0f);
  write_emb1(dir / "rec1.emb", stored);
  PrecomputedBackend b({"tag", kTaggingEmbeddingDim, 16000, BackendSource::kPrecomputed}, dir.path());
  EXPECT_FALSE(b.consumes_audio());
  const EmbeddingMatrix m = embed(b, AudioClip{}, "rec1");
  EXPECT_TRUE(m.values == stored);
}

TEST(PrecomputedBackend, Errors) {
  TempDir dir("emb");
  write_emb1(dir / "narrow.emb", filled(1, 10, 0.0f));
  Matrix<float> nan_row(1, 8, 0.0f);
  nan_row(0, 3) = std::numeric_limits<float>::quiet_NaN();
  write_emb1(dir / "nan.emb", nan_row);
  write_emb1(dir / "empty.emb", Matrix<float>(0, 8));
  PrecomputedBackend b({"p", 8, 16000, BackendSource::kPrecomputed}, dir.path());
  EXPECT_ERROR_CODE(embed(b, AudioClip{}, "narrow"), ErrorCode::kDimensionMismatch);
  EXPECT_ERROR_CODE(embed(b, AudioClip{}, "nan"), ErrorCode::kBackendFailure);
  EXPECT_ERROR_CODE(embed(b, AudioClip{}, "empty"), ErrorCode::kBackendFailure);
  EXPECT_ERROR_CODE(embed(b, AudioClip{}, "missing"), ErrorCode::kBackendFailure);
  EXPECT_ERROR_CODE(embed(b, AudioClip{}, "../narrow"), ErrorCode::kBackendFailure);
}

TEST(InterchangeBackend, AcceptsBatchedAndFlatShapes) {
  const BackendInfo info{"m", 4, 16000, BackendSource::kInterchangeModel};
  Tensor batched{{1, 2, 4}, std::vector<float>(8, 0.25f)};
  InterchangeModelBackend a(info, std::make_unique<FakeSession>(batched));
  EXPECT_EQ(embed(a, silence(16000, 1.0)).values.rows(), 2u);
  Tensor flat{{4}, std::vector<float>(4, 0.5f)};
  InterchangeModelBackend b(info, std::make_unique<FakeSession>(flat));
  const EmbeddingMatrix m = embed(b, silence(16000, 1.0));
  EXPECT_EQ(m.values.rows(), 1u);
  EXPECT_EQ(m.values(0, 3), 0.5f);
}

TEST(InterchangeBackend, Failures) {
  const BackendInfo info{"m", 4, 16000, BackendSource::kInterchangeModel};
  InterchangeModelBackend wide(info, std::make_unique<FakeSession>(Tensor{{1, 5}, std::vector<float>(5)}));
  EXPECT_ERROR_CODE(embed(wide, silence(16000, 1.0)), ErrorCode::kDimensionMismatch);
  InterchangeModelBackend broken(info, std::make_unique<FakeSession>(Tensor{}, true));
  EXPECT_ERROR_CODE(embed(broken, silence(16000, 1.0)), ErrorCode::kBackendFailure);
  InterchangeModelBackend rank4(info, std::make_unique<FakeSession>(Tensor{{1, 1, 1, 4}, std::vector<float>(4)}));
  EXPECT_ERROR_CODE(embed(rank4, silence(16000, 1.0)), ErrorCode::kBackendFailure);
  InterchangeModelBackend inf(info, std::make_unique<FakeSession>(
      Tensor{{1, 4}, {0, 1, std::numeric_limits<float>::infinity(), 0}}));
  EXPECT_ERROR_CODE(embed(inf, silence(16000, 1.0)), ErrorCode::kBackendFailure);
}

TEST(InterchangeBackend, MissingRuntimeOrModelIsBackendFailure) {
  EXPECT_ERROR_CODE(open_interchange_session("/nonexistent/model.onnx"),
                    ErrorCode::kBackendFailure);
}

TEST(BackendManifest, ParsesObjectAndArray) {
  const auto one = parse_backend_manifest(
      R"({"id":"tag","embeddings_dir":"emb/tag","output_dim":1024,"sample_rate":16000})", "/base");
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].info.source, BackendSource::kPrecomputed);
  EXPECT_EQ(one[0].location, std::filesystem::path("/base/emb/tag"));

  const auto two = parse_backend_manifest(R"([
    {"id":"env","model_path":"/models/env.onnx","output_dim":6144,"sample_rate":48000},
    {"id":"tag","embeddings_dir":"tag","output_dim":1024,"sample_rate":16000}])", "/b");
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[0].info.source, BackendSource::kInterchangeModel);
  EXPECT_EQ(two[0].location, std::filesystem::path("/models/env.onnx"));
  EXPECT_EQ(two[0].info.sample_rate, 48000u);
}

TEST(BackendManifest, Rejections) {
  EXPECT_ERROR_CODE(parse_backend_manifest("not json", "/"), ErrorCode::kInvalidArgument);
  EXPECT_ERROR_CODE(parse_backend_manifest("[]", "/"), ErrorCode::kInvalidArgument);
  EXPECT_ERROR_CODE(parse_backend_manifest(R"({"id":"x","output_dim":4,"sample_rate":1})", "/"),
                    ErrorCode::kInvalidArgument);
  EXPECT_ERROR_CODE(
      parse_backend_manifest(
          R"({"id":"x","model_path":"a","embeddings_dir":"b","output_dim":4,"sample_rate":1})", "/"),
      ErrorCode::kInvalidArgument);
  EXPECT_ERROR_CODE(parse_backend_manifest(
                        R"({"id":"x","embeddings_dir":"b","output_dim":0,"sample_rate":1})", "/"),
                    ErrorCode::kInvalidArgument);
  EXPECT_ERROR_CODE(parse_backend_manifest(R"([
    {"id":"tag","embeddings_dir":"t","output_dim":1024,"sample_rate":16000},
    {"id":"env","embeddings_dir":"e","output_dim":6144,"sample_rate":48000}])", "/"),
                    ErrorCode::kInvalidArgument);
}

TEST(ExtractFeatures, PrecomputedPipelineWithoutAudio) {
  TempDir dir("emb");
  write_emb1(dir / "env" / "r.emb", filled(2, kEnvironmentalEmbeddingDim, 0.0f));
  write_emb1(dir / "tag" / "r.emb", filled(3, kTaggingEmbeddingDim, 1.0f));
  write_file_text(dir / "backends.json", R"([
    {"id":"env","embeddings_dir":"env","output_dim":6144,"sample_rate":48000},
    {"id":"tag","embeddings_dir":"tag","output_dim":1024,"sample_rate":16000}])");
  std::vector<std::unique_ptr<EmbeddingBackend>> backends;
  for (const auto& s : load_backend_manifest(dir / "backends.json")) backends.push_back(make_backend(s));
  const FeatureVector a = extract_features(backends, AudioClip{}, "r");
  const FeatureVector b = extract_features(backends, AudioClip{}, "r");
  ASSERT_EQ(a.values.size(), kFeatureDim);
  EXPECT_EQ(a.values, b.values);
}

}  // namespace
}  // namespace coughscreen
