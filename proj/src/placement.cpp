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

#include "tessera/placement.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tessera/error.hpp"

namespace tessera {

ScaleSemantics parse_scale_semantics(std::string_view name) {
  if (name == "area") return ScaleSemantics::kArea;
  if (name == "side") return ScaleSemantics::kSide;
  fail(ErrorCode::kInvalidArgument, "unknown scale semantics '" + std::string(name) + "'");
}

std::string_view scale_semantics_name(ScaleSemantics semantics) {
  return semantics == ScaleSemantics::kArea ? "area" : "side";
}

void PlacementConfig::validate() const {
  if (!(scale_fraction > 0.0 && scale_fraction <= 1.0)) {
    fail(ErrorCode::kInvalidArgument,
         "scale_fraction must be in (0,1], got " + std::to_string(scale_fraction));
  }
}

double paste_side_for_box(double box_width_px, double box_height_px,
                          const PlacementConfig& cfg) {
  const double box_area = box_width_px * box_height_px;
  return cfg.semantics == ScaleSemantics::kArea ? std::sqrt(cfg.scale_fraction * box_area)
                                                : cfg.scale_fraction * std::sqrt(box_area);
}

namespace {

int checked_paste_side(const BoundingBox& box, int image_height, int image_width,
                       const PlacementConfig& cfg, bool& clamped) {
  cfg.validate();
  if (!box.is_valid() || !box.intersects_image()) {
    fail(ErrorCode::kBoxOutsideImage, "box does not denormalize inside the image");
  }
  const PixelRect r = box.to_pixels(image_height, image_width);
  const long side = std::lround(paste_side_for_box(r.width(), r.height(), cfg));
  clamped = side < 1;
  return static_cast<int>(std::max(1L, side));
}

}  // namespace

PatchPaste::PatchPaste(int patch_side, const BoundingBox& box, int image_height,
                       int image_width, const PlacementConfig& cfg)
    : patch_side_(patch_side),
      image_height_(image_height),
      image_width_(image_width),
      paste_side_(checked_paste_side(box, image_height, image_width, cfg, clamped_)),
      left_(0),
      top_(0),
      plan_(make_resize_plan(patch_side, patch_side, paste_side_, paste_side_,
                             ResizeKernel::kBilinear)) {
  const double center_x = (box.cx + cfg.offset_x * box.w) * image_width;
  const double center_y = (box.cy + cfg.offset_y * box.h) * image_height;
  left_ = static_cast<int>(std::lround(center_x - paste_side_ / 2.0));
  top_ = static_cast<int>(std::lround(center_y - paste_side_ / 2.0));
}

std::size_t PatchPaste::pasted_pixel_count() const noexcept {
  const int x0 = std::max(0, left_);
  const int y0 = std::max(0, top_);
  const int x1 = std::min(image_width_, left_ + paste_side_);
  const int y1 = std::min(image_height_, top_ + paste_side_);
  if (x1 <= x0 || y1 <= y0) return 0;
  return static_cast<std::size_t>(x1 - x0) * static_cast<std::size_t>(y1 - y0);
}

ImageBuffer PatchPaste::apply(const ImageBuffer& image, const PatchElement& patch) const {
  if (image.height() != image_height_ || image.width() != image_width_) {
    fail(ErrorCode::kDimensionMismatch, "image does not match placement geometry");
  }
  if (patch.side() != patch_side_ || patch.channels() != image.channels()) {
    fail(ErrorCode::kDimensionMismatch, "patch does not match placement geometry");
  }
  const ImageBuffer resized = plan_.apply(patch.pixels());
  ImageBuffer out = image;
  const int channels = image.channels();
  for (int py = 0; py < paste_side_; ++py) {
    const int y = top_ + py;
    if (y < 0 || y >= image_height_) continue;
    for (int px = 0; px < paste_side_; ++px) {
      const int x = left_ + px;
      if (x < 0 || x >= image_width_) continue;
      for (int c = 0; c < channels; ++c) out.at(y, x, c) = resized.at(py, px, c);
    }
  }
  return out;
}

ImageBuffer PatchPaste::backward(const ImageBuffer& grad_image) const {
  const int channels = grad_image.channels();
  ImageBuffer grad_paste(paste_side_, paste_side_, channels);
  for (int py = 0; py < paste_side_; ++py) {
    const int y = top_ + py;
    if (y < 0 || y >= image_height_) continue;
    for (int px = 0; px < paste_side_; ++px) {
      const int x = left_ + px;
      if (x < 0 || x >= image_width_) continue;
      for (int c = 0; c < channels; ++c) grad_paste.at(py, px, c) = grad_image.at(y, x, c);
    }
  }
  return plan_.apply_transpose(grad_paste);
}

ImageBuffer place_patch(const ImageBuffer& image, const PatchElement& patch,
                        const BoundingBox& box, const PlacementConfig& cfg) {
  return PatchPaste(patch.side(), box, image.height(), image.width(), cfg).apply(image, patch);
}

ImageBuffer tile_element(const PatchElement& element, int height, int width) {
  const int side = element.side();
  const int channels = element.channels();
  ImageBuffer out(height, width, channels);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < channels; ++c) out.at(y, x, c) = element.at(y % side, x % side, c);
    }
  }
  return out;
}

ImageBuffer apply_masked_pattern(const ImageBuffer& image, const PatchElement& element,
                                 const BooleanMask& mask) {
  if (mask.height() != image.height() || mask.width() != image.width()) {
    fail(ErrorCode::kDimensionMismatch, "mask does not match image dimensions");
  }
  if (element.channels() != image.channels()) {
    fail(ErrorCode::kDimensionMismatch, "element channels do not match image");
  }
  const int side = element.side();
  const int channels = image.channels();
  ImageBuffer out = image;
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      if (!mask.at(y, x)) continue;
      for (int c = 0; c < channels; ++c) out.at(y, x, c) = element.at(y % side, x % side, c);
    }
  }
  return out;
}

ImageBuffer masked_pattern_backward(const ImageBuffer& grad_image, const BooleanMask& mask,
                                    int element_side) {
  if (mask.height() != grad_image.height() || mask.width() != grad_image.width()) {
    fail(ErrorCode::kDimensionMismatch, "mask does not match gradient dimensions");
  }
  const int channels = grad_image.channels();
  ImageBuffer grad(element_side, element_side, channels);
  for (int y = 0; y < grad_image.height(); ++y) {
    for (int x = 0; x < grad_image.width(); ++x) {
      if (!mask.at(y, x)) continue;
      for (int c = 0; c < channels; ++c) {
        grad.at(y % element_side, x % element_side, c) += grad_image.at(y, x, c);
      }
    }
  }
  return grad;
}

PatchElement rescale_element(const PatchElement& element, int new_side) {
  new_side = std::max(2, new_side);
  return PatchElement(resize(element.pixels(), new_side, new_side, ResizeKernel::kBilinear));
}

}  // namespace tessera
