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

#include "tessera/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tessera/error.hpp"

namespace tessera {
namespace {

void check_dims(int height, int width, int channels) {
  if (height < 1 || width < 1) {
    fail(ErrorCode::kInvalidArgument,
         "image dimensions must be positive, got " + std::to_string(height) + "x" +
             std::to_string(width));
  }
  if (channels != 1 && channels != 3) {
    fail(ErrorCode::kInvalidArgument,
         "image channels must be 1 or 3, got " + std::to_string(channels));
  }
}

}  // namespace

ImageBuffer::ImageBuffer(int height, int width, int channels, double fill)
    : height_(height), width_(width), channels_(channels) {
  check_dims(height, width, channels);
  data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

ImageBuffer::ImageBuffer(int height, int width, int channels, std::vector<double> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  check_dims(height, width, channels);
  if (data_.size() != static_cast<std::size_t>(height) * width * channels) {
    fail(ErrorCode::kDimensionMismatch, "image data length does not match shape");
  }
}

void ImageBuffer::clamp() noexcept {
  for (double& v : data_) v = std::clamp(v, 0.0, 1.0);
}

bool ImageBuffer::all_finite_in_unit_range() const noexcept {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; });
}

void require_same_shape(const ImageBuffer& a, const ImageBuffer& b, const char* what) {
  if (!a.same_shape(b)) {
    fail(ErrorCode::kDimensionMismatch,
         std::string(what) + ": " + std::to_string(a.height()) + "x" +
             std::to_string(a.width()) + "x" + std::to_string(a.channels()) + " vs " +
             std::to_string(b.height()) + "x" + std::to_string(b.width()) + "x" +
             std::to_string(b.channels()));
  }
}

PatchElement::PatchElement(ImageBuffer pixels) : pixels_(std::move(pixels)) {
  if (pixels_.height() != pixels_.width()) {
    fail(ErrorCode::kInvalidArgument, "patch element must be square");
  }
  if (pixels_.height() < 2) {
    fail(ErrorCode::kInvalidArgument, "patch element side must be at least 2");
  }
}

PatchElement::PatchElement(int side, int channels, double fill)
    : PatchElement(ImageBuffer(side, side, channels, fill)) {}

}  // namespace tessera
