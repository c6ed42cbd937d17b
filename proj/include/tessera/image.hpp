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

#ifndef TESSERA_IMAGE_HPP_
#define TESSERA_IMAGE_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace tessera {

// Height x width x channels intensities, row-major with channels last.
// Values are nominally in [0,1]; clamp() enforces it after operations that
// can overshoot. channels is 1 or 3.
class ImageBuffer {
 public:
  ImageBuffer(int height, int width, int channels, double fill = 0.0);
  ImageBuffer(int height, int width, int channels, std::vector<double> data);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
  }
  std::size_t size() const noexcept { return data_.size(); }

  std::size_t index(int y, int x, int c) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(channels_) +
           static_cast<std::size_t>(c);
  }
  double& at(int y, int x, int c) noexcept { return data_[index(y, x, c)]; }
  double at(int y, int x, int c) const noexcept { return data_[index(y, x, c)]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool same_shape(const ImageBuffer& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_ &&
           channels_ == other.channels_;
  }

  void clamp() noexcept;
  bool all_finite_in_unit_range() const noexcept;

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  int height_;
  int width_;
  int channels_;
  std::vector<double> data_;
};

// Throws DimensionMismatch unless a and b have identical shapes.
void require_same_shape(const ImageBuffer& a, const ImageBuffer& b, const char* what);

// The optimization variable: a small square tile.
class PatchElement {
 public:
  explicit PatchElement(ImageBuffer pixels);
  PatchElement(int side, int channels, double fill);

  int side() const noexcept { return pixels_.height(); }
  int channels() const noexcept { return pixels_.channels(); }
  const ImageBuffer& pixels() const noexcept { return pixels_; }
  ImageBuffer& pixels() noexcept { return pixels_; }
  double at(int y, int x, int c) const noexcept { return pixels_.at(y, x, c); }

  void clamp() noexcept { pixels_.clamp(); }

  friend bool operator==(const PatchElement&, const PatchElement&) = default;

 private:
  ImageBuffer pixels_;
};

}  // namespace tessera

#endif  // TESSERA_IMAGE_HPP_
