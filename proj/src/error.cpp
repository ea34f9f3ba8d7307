// Copyright 2026 The vfmr Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vfmr/error.hpp"

namespace vfmr {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kUnknownIdentity: return "UnknownIdentity";
    case ErrorCode::kNoRelevantItems: return "NoRelevantItems";
    case ErrorCode::kStreamTooShort: return "StreamTooShort";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kInvalidData: return "InvalidData";
  }
  return "Unknown";
}

}  // namespace vfmr
