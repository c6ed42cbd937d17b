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

#include "tessera/image_io.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "tessera/error.hpp"

namespace tessera {
namespace {

// OpenCV stores color as BGR; our buffers are RGB.
cv::Mat to_mat(const ImageBuffer& image) {
  const int channels = image.channels();
  cv::Mat mat(image.height(), image.width(), channels == 3 ? CV_8UC3 : CV_8UC1);
  for (int y = 0; y < image.height(); ++y) {
    auto* row = mat.ptr<std::uint8_t>(y);
    for (int x = 0; x < image.width(); ++x) {
      for (int c = 0; c < channels; ++c) {
        const int dst_c = channels == 3 ? 2 - c : c;
        row[x * channels + dst_c] = to_byte(image.at(y, x, c));
      }
    }
  }
  return mat;
}

ImageBuffer from_mat(const cv::Mat& mat) {
  if (mat.empty()) fail(ErrorCode::kCodecFailure, "decoder returned an empty image");
  if (mat.depth() != CV_8U) {
    fail(ErrorCode::kCodecFailure, "only 8-bit images are supported");
  }
  const int channels = mat.channels() == 1 ? 1 : 3;
  ImageBuffer image(mat.rows, mat.cols, channels);
  for (int y = 0; y < mat.rows; ++y) {
    const auto* row = mat.ptr<std::uint8_t>(y);
    for (int x = 0; x < mat.cols; ++x) {
      for (int c = 0; c < channels; ++c) {
        const int src_c = channels == 3 ? 2 - c : c;
        image.at(y, x, c) = row[x * mat.channels() + src_c] / 255.0;
      }
    }
  }
  return image;
}

}  // namespace

std::uint8_t to_byte(double v) noexcept {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

ImageBuffer read_image(const std::filesystem::path& path) {
  cv::Mat mat = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (mat.empty()) fail(ErrorCode::kIoError, "cannot read image " + path.string());
  return from_mat(mat);
}

void write_png(const ImageBuffer& image, const std::filesystem::path& path) {
  if (!cv::imwrite(path.string(), to_mat(image))) {
    fail(ErrorCode::kIoError, "cannot write image " + path.string());
  }
}

std::vector<std::uint8_t> encode_png(const ImageBuffer& image) {
  std::vector<std::uint8_t> bytes;
  if (!cv::imencode(".png", to_mat(image), bytes)) {
    fail(ErrorCode::kCodecFailure, "PNG encoding failed");
  }
  return bytes;
}

ImageBuffer decode_image(const std::vector<std::uint8_t>& bytes) {
  if (bytes.empty()) fail(ErrorCode::kCodecFailure, "empty image payload");
  cv::Mat mat = cv::imdecode(bytes, cv::IMREAD_COLOR);
  if (mat.empty()) fail(ErrorCode::kCodecFailure, "image payload could not be decoded");
  return from_mat(mat);
}

ImageBuffer jpeg_roundtrip(const ImageBuffer& image, int quality) {
  if (quality < 1 || quality > 100) {
    fail(ErrorCode::kCodecFailure, "JPEG quality must be in [1,100]");
  }
  std::vector<std::uint8_t> bytes;
  const std::vector<int> params = {cv::IMWRITE_JPEG_QUALITY, quality};
  if (!cv::imencode(".jpg", to_mat(image), bytes, params)) {
    fail(ErrorCode::kCodecFailure, "JPEG encoding failed");
  }
  cv::Mat decoded =
      cv::imdecode(bytes, image.channels() == 3 ? cv::IMREAD_COLOR : cv::IMREAD_GRAYSCALE);
  return from_mat(decoded);
}

std::string codec_version() { return std::string("opencv-") + CV_VERSION; }

}  // namespace tessera
