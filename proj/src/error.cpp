// Copyright 2026 The Tessera Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tessera/error.hpp"

namespace tessera {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kPolygonDegenerate: return "PolygonDegenerate";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kRangeError: return "RangeError";
    case ErrorCode::kEmptyDirectory: return "EmptyDirectory";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kBoxOutsideImage: return "BoxOutsideImage";
    case ErrorCode::kCodecFailure: return "CodecFailure";
    case ErrorCode::kAdapterFailure: return "AdapterFailure";
    case ErrorCode::kNoBoxes: return "NoBoxes";
    case ErrorCode::kNoPolygons: return "NoPolygons";
    case ErrorCode::kNoGradient: return "NoGradient";
    case ErrorCode::kEmptyRecords: return "EmptyRecords";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
      code_(code) {}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace tessera
