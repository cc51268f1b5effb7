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

#include "coughscreen/error.hpp"

namespace coughscreen {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kUnreadableFile: return "UnreadableFile";
    case ErrorCode::kEmptyAudio: return "EmptyAudio";
    case ErrorCode::kBackendFailure: return "BackendFailure";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kEmptyMatrix: return "EmptyMatrix";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kSingleClassData: return "SingleClassData";
    case ErrorCode::kNaNFeature: return "NaNFeature";
    case ErrorCode::kCorruptModelFile: return "CorruptModelFile";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kSingleClassLabels: return "SingleClassLabels";
    case ErrorCode::kUnattainable: return "Unattainable";
    case ErrorCode::kMissingId: return "MissingId";
    case ErrorCode::kLabelMissing: return "LabelMissing";
    case ErrorCode::kMissingFeatures: return "MissingFeatures";
    case ErrorCode::kInvalidSplit: return "InvalidSplit";
    case ErrorCode::kDegenerateDistances: return "DegenerateDistances";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

}  // namespace coughscreen
