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

#ifndef TESSERA_ERROR_HPP_
#define TESSERA_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace tessera {

enum class ErrorCode {
  kInvalidArgument,
  kPolygonDegenerate,
  kDimensionMismatch,
  kParseError,
  kRangeError,
  kEmptyDirectory,
  kIoError,
  kBoxOutsideImage,
  kCodecFailure,
  kAdapterFailure,
  kNoBoxes,
  kNoPolygons,
  kNoGradient,
  kEmptyRecords,
  kConfigError,
};

std::string_view error_code_name(ErrorCode code);

// All library failures are reported as tessera::Error carrying a code that
// callers (notably the CLI exit-code mapping) can branch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace tessera

#endif  // TESSERA_ERROR_HPP_
