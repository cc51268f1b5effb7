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

#include <system_error>

#include "coughscreen/backend.hpp"
#include "coughscreen/error.hpp"

#ifdef COUGHSCREEN_WITH_ONNXRUNTIME
#include <onnxruntime_cxx_api.h>
#endif

namespace coughscreen {

#ifdef COUGHSCREEN_WITH_ONNXRUNTIME
namespace {

class OnnxSession final : public InferenceSession {
 public:
  explicit OnnxSession(const std::filesystem::path& model_path)
      : env_(ORT_LOGGING_LEVEL_WARNING, "coughscreen") {
    Ort::SessionOptions options;
    options.SetIntraOpNumThreads(1);
    options.SetGraphOptimizationLevel(GraphOptimizationLevel::ORT_ENABLE_EXTENDED);
    session_ = std::make_unique<Ort::Session>(env_, model_path.c_str(), options);
    if (session_->GetInputCount() != 1 || session_->GetOutputCount() < 1) {
      throw Error(ErrorCode::kBackendFailure,
                  model_path.string() + ": expected one waveform input");
    }
    Ort::AllocatorWithDefaultOptions allocator;
    input_name_ = session_->GetInputNameAllocated(0, allocator).get();
    output_name_ = session_->GetOutputNameAllocated(0, allocator).get();
    auto info = session_->GetInputTypeInfo(0).GetTensorTypeAndShapeInfo();
    input_rank_ = info.GetDimensionsCount();
  }

  Tensor run(std::span<const float> waveform) const override {
    auto memory = Ort::MemoryInfo::CreateCpu(OrtArenaAllocator, OrtMemTypeDefault);
    std::vector<std::int64_t> shape;
    if (input_rank_ == 2) shape.push_back(1);
    shape.push_back(static_cast<std::int64_t>(waveform.size()));
    auto input = Ort::Value::CreateTensor<float>(
        memory, const_cast<float*>(waveform.data()), waveform.size(),
        shape.data(), shape.size());
    const char* in_names[] = {input_name_.c_str()};
    const char* out_names[] = {output_name_.c_str()};
    auto outputs = session_->Run(Ort::RunOptions{nullptr}, in_names, &input, 1,
                                 out_names, 1);
    auto& value = outputs.front();
    auto out_info = value.GetTensorTypeAndShapeInfo();
    Tensor t;
    t.shape = out_info.GetShape();
    const float* data = value.GetTensorData<float>();
    t.data.assign(data, data + out_info.GetElementCount());
    return t;
  }

 private:
  Ort::Env env_;
  std::unique_ptr<Ort::Session> session_;
  std::string input_name_;
  std::string output_name_;
  std::size_t input_rank_ = 1;
};

}  // namespace

bool interchange_runtime_available() { return true; }

std::unique_ptr<InferenceSession> open_interchange_session(
    const std::filesystem::path& model_path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(model_path, ec)) {
    throw Error(ErrorCode::kBackendFailure,
                "model file not found: " + model_path.string());
  }
  try {
    return std::make_unique<OnnxSession>(model_path);
  } catch (const Ort::Exception& e) {
    throw Error(ErrorCode::kBackendFailure,
                model_path.string() + ": " + e.what());
  }
}

#else

bool interchange_runtime_available() { return false; }

std::unique_ptr<InferenceSession> open_interchange_session(
    const std::filesystem::path& model_path) {
  throw Error(ErrorCode::kBackendFailure,
              "cannot load " + model_path.string() +
                  ": built without ONNX Runtime (configure with "
                  "-DCOUGHSCREEN_WITH_ONNXRUNTIME=ON); use a precomputed "
                  "embeddings backend instead");
}

#endif

}  // namespace coughscreen
