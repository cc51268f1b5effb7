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

#include "coughscreen/backend.hpp"

#include <cmath>

#include "json.hpp"

#include "coughscreen/error.hpp"
#include "coughscreen/io.hpp"

namespace coughscreen {
namespace fs = std::filesystem;
using nlohmann::json;

EmbeddingMatrix embed(const EmbeddingBackend& backend, const AudioClip& clip,
                      std::string_view recording_id) {
  const BackendInfo& info = backend.info();
  Matrix<float> values;
  if (backend.consumes_audio()) {
    if (clip.samples.empty()) {
      throw Error(ErrorCode::kEmptyAudio,
                  "backend '" + info.id + "' needs audio for '" +
                      std::string(recording_id) + "'");
    }
    const AudioClip prepared =
        pad_to_duration(resample(clip, info.sample_rate), kMinBackendSeconds);
    values = backend.embed(prepared, recording_id);
  } else {
    values = backend.embed(clip, recording_id);
  }

  if (values.rows() == 0) {
    throw Error(ErrorCode::kBackendFailure,
                "backend '" + info.id + "' returned no frames");
  }
  if (values.cols() != info.output_dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                "backend '" + info.id + "' returned " +
                    std::to_string(values.cols()) + " dims, declared " +
                    std::to_string(info.output_dim));
  }
  for (float v : values.data()) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kBackendFailure,
                  "backend '" + info.id + "' produced a non-finite value for '" +
                      std::string(recording_id) + "'");
    }
  }
  return {std::move(values), info.id};
}

PrecomputedBackend::PrecomputedBackend(BackendInfo info, fs::path directory)
    : info_(std::move(info)), directory_(std::move(directory)) {
  info_.source = BackendSource::kPrecomputed;
}

fs::path PrecomputedBackend::path_for(std::string_view recording_id) const {
  return directory_ / (std::string(recording_id) + ".emb");
}

Matrix<float> PrecomputedBackend::embed(const AudioClip& /*clip*/,
                                        std::string_view recording_id) const {
  if (recording_id.empty() ||
      recording_id.find_first_of("/\\") != std::string_view::npos ||
      recording_id == "." || recording_id == "..") {
    throw Error(ErrorCode::kBackendFailure,
                "invalid recording id '" + std::string(recording_id) + "'");
  }
  const fs::path path = path_for(recording_id);
  try {
    return read_emb1(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::kBackendFailure,
                "backend '" + info_.id + "' has no stored embedding for '" +
                    std::string(recording_id) + "': " + e.what());
  }
}

InterchangeModelBackend::InterchangeModelBackend(
    BackendInfo info, std::unique_ptr<InferenceSession> session)
    : info_(std::move(info)), session_(std::move(session)) {
  info_.source = BackendSource::kInterchangeModel;
  if (!session_) {
    throw Error(ErrorCode::kBackendFailure, "backend '" + info_.id +
                                                "' has no inference session");
  }
}

Matrix<float> InterchangeModelBackend::embed(
    const AudioClip& clip, std::string_view recording_id) const {
  if (clip.sample_rate != info_.sample_rate) {
    throw Error(ErrorCode::kInvalidArgument,
                "backend '" + info_.id + "' expects " +
                    std::to_string(info_.sample_rate) + " Hz input");
  }
  Tensor out;
  try {
    out = session_->run(clip.samples);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kBackendFailure,
                "inference failed for '" + std::string(recording_id) +
                    "': " + e.what());
  }
  std::vector<std::int64_t> shape = out.shape;
  if (shape.size() == 3 && shape[0] == 1) shape.erase(shape.begin());
  if (shape.size() == 1) shape.insert(shape.begin(), 1);
  if (shape.size() != 2 || shape[0] < 0 || shape[1] < 0) {
    throw Error(ErrorCode::kBackendFailure,
                "backend '" + info_.id + "' returned a rank-" +
                    std::to_string(out.shape.size()) + " tensor");
  }
  const auto rows = static_cast<std::size_t>(shape[0]);
  const auto cols = static_cast<std::size_t>(shape[1]);
  if (cols != info_.output_dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                "backend '" + info_.id + "' model emits " +
                    std::to_string(cols) + " dims, declared " +
                    std::to_string(info_.output_dim));
  }
  if (out.data.size() != rows * cols) {
    throw Error(ErrorCode::kBackendFailure,
                "backend '" + info_.id + "' tensor size disagrees with shape");
  }
  return Matrix<float>(rows, cols, std::move(out.data));
}

std::vector<BackendSpec> parse_backend_manifest(std::string_view json_text,
                                                const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("backend manifest is not valid JSON: ") + e.what());
  }
  if (doc.is_object()) doc = json::array({doc});
  if (!doc.is_array() || doc.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "backend manifest must be an object or a non-empty array");
  }
  std::vector<BackendSpec> specs;
  for (const auto& entry : doc) {
    BackendSpec spec;
    try {
      spec.info.id = entry.at("id").get<std::string>();
      const auto dim = entry.at("output_dim").get<std::int64_t>();
      const auto rate = entry.at("sample_rate").get<std::int64_t>();
      if (dim <= 0 || rate <= 0) {
        throw Error(ErrorCode::kInvalidArgument,
                    "backend '" + spec.info.id +
                        "' needs positive output_dim and sample_rate");
      }
      spec.info.output_dim = static_cast<std::size_t>(dim);
      spec.info.sample_rate = static_cast<std::uint32_t>(rate);
      const bool has_model = entry.contains("model_path");
      const bool has_dir = entry.contains("embeddings_dir");
      if (has_model == has_dir) {
        throw Error(ErrorCode::kInvalidArgument,
                    "backend '" + spec.info.id +
                        "' needs exactly one of model_path, embeddings_dir");
      }
      fs::path location =
          entry.at(has_model ? "model_path" : "embeddings_dir").get<std::string>();
      spec.location = location.is_absolute() ? location : base_dir / location;
      spec.info.source = has_model ? BackendSource::kInterchangeModel
                                   : BackendSource::kPrecomputed;
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string("bad backend manifest entry: ") + e.what());
    }
    specs.push_back(std::move(spec));
  }

  std::ptrdiff_t first_env = -1;
  std::ptrdiff_t first_tag = -1;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto dim = specs[i].info.output_dim;
    if (dim == kEnvironmentalEmbeddingDim && first_env < 0) first_env = i;
    if (dim == kTaggingEmbeddingDim && first_tag < 0) first_tag = i;
  }
  if (first_env >= 0 && first_tag >= 0 && first_tag < first_env) {
    throw Error(ErrorCode::kInvalidArgument,
                "the 6144-dim backend must precede the 1024-dim backend");
  }
  return specs;
}

std::vector<BackendSpec> load_backend_manifest(const fs::path& path) {
  return parse_backend_manifest(read_file_text(path), path.parent_path());
}

std::unique_ptr<EmbeddingBackend> make_backend(const BackendSpec& spec) {
  if (spec.info.source == BackendSource::kPrecomputed) {
    return std::make_unique<PrecomputedBackend>(spec.info, spec.location);
  }
  return std::make_unique<InterchangeModelBackend>(
      spec.info, open_interchange_session(spec.location));
}

FeatureVector extract_features(
    std::span<const std::unique_ptr<EmbeddingBackend>> backends,
    const AudioClip& clip, std::string_view recording_id) {
  std::vector<EmbeddingMatrix> mats;
  mats.reserve(backends.size());
  for (const auto& b : backends) mats.push_back(embed(*b, clip, recording_id));
  return pool_and_concat(mats, std::string(recording_id));
}

}  // namespace coughscreen
