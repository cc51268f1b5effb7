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

#ifndef COUGHSCREEN_BACKEND_HPP_
#define COUGHSCREEN_BACKEND_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coughscreen/audio.hpp"
#include "coughscreen/embedding.hpp"

namespace coughscreen {

enum class BackendSource { kInterchangeModel, kPrecomputed };

struct BackendInfo {
  std::string id;
  std::size_t output_dim = 0;
  std::uint32_t sample_rate = 0;
  BackendSource source = BackendSource::kPrecomputed;
};

/// Shortest input a backend accepts; shorter clips are padded.
inline constexpr double kMinBackendSeconds = 1.0;

/// A pretrained embedding network, or a stand-in that replays stored output.
/// Implementations must be safe for concurrent calls to embed().
class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;

  virtual const BackendInfo& info() const = 0;

  /// Whether embed() reads the waveform. Backends that do not may be given
  /// an empty clip.
  virtual bool consumes_audio() const {
    return info().source == BackendSource::kInterchangeModel;
  }

  /// `clip` is already at info().sample_rate and at least one second long.
  /// Framing is backend-defined.
  virtual Matrix<float> embed(const AudioClip& clip,
                              std::string_view recording_id) const = 0;
};

/// Resamples and pads as the backend requires, runs it, and validates the
/// output shape and values. Throws kDimensionMismatch when the column count
/// differs from the declared output_dim and kBackendFailure for runtime
/// errors, empty output or non-finite values.
EmbeddingMatrix embed(const EmbeddingBackend& backend, const AudioClip& clip,
                      std::string_view recording_id = {});

/// Replays EMB1 files named `<directory>/<recording_id>.emb`.
class PrecomputedBackend final : public EmbeddingBackend {
 public:
  PrecomputedBackend(BackendInfo info, std::filesystem::path directory);

  const BackendInfo& info() const override { return info_; }
  Matrix<float> embed(const AudioClip& clip,
                      std::string_view recording_id) const override;

  std::filesystem::path path_for(std::string_view recording_id) const;

 private:
  BackendInfo info_;
  std::filesystem::path directory_;
};

struct Tensor {
  std::vector<std::int64_t> shape;
  std::vector<float> data;
};

/// Minimal inference runtime surface: one float waveform in, one float
/// tensor out. Must be safe for concurrent run() calls.
class InferenceSession {
 public:
  virtual ~InferenceSession() = default;
  virtual Tensor run(std::span<const float> waveform) const = 0;
};

/// Opens an interchange-format model file. Throws kBackendFailure when the
/// file cannot be loaded or the library was built without a runtime.
std::unique_ptr<InferenceSession> open_interchange_session(
    const std::filesystem::path& model_path);

/// True when an interchange runtime was compiled in.
bool interchange_runtime_available();

/// Backend for exported networks that take a raw mono waveform at their
/// native rate and return a (frames x dim) or (1 x frames x dim) tensor.
class InterchangeModelBackend final : public EmbeddingBackend {
 public:
  InterchangeModelBackend(BackendInfo info,
                          std::unique_ptr<InferenceSession> session);

  const BackendInfo& info() const override { return info_; }
  Matrix<float> embed(const AudioClip& clip,
                      std::string_view recording_id) const override;

 private:
  BackendInfo info_;
  std::unique_ptr<InferenceSession> session_;
};

struct BackendSpec {
  BackendInfo info;
  /// model_path for interchange backends, embeddings_dir for precomputed.
  std::filesystem::path location;
};

/// Parses a backend manifest: a JSON object or array of objects with
/// {"id", "output_dim", "sample_rate"} plus either "model_path" or
/// "embeddings_dir". Relative paths resolve against the manifest's
/// directory. When both built-in dimensions are listed, the 6144-dim
/// backend must come first.
std::vector<BackendSpec> parse_backend_manifest(
    std::string_view json_text, const std::filesystem::path& base_dir);
std::vector<BackendSpec> load_backend_manifest(
    const std::filesystem::path& path);

std::unique_ptr<EmbeddingBackend> make_backend(const BackendSpec& spec);

/// Embeds one recording with every backend (in order) and pools the result.
FeatureVector extract_features(
    std::span<const std::unique_ptr<EmbeddingBackend>> backends,
    const AudioClip& clip, std::string_view recording_id);

}  // namespace coughscreen

#endif  // COUGHSCREEN_BACKEND_HPP_
