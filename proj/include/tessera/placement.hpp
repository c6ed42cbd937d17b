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

#ifndef TESSERA_PLACEMENT_HPP_
#define TESSERA_PLACEMENT_HPP_

#include <cstddef>
#include <string_view>

#include "tessera/geometry.hpp"
#include "tessera/image.hpp"
#include "tessera/resample.hpp"

namespace tessera {

// Whether scale_fraction constrains the pasted area or the pasted side length
// relative to the box.
enum class ScaleSemantics { kArea, kSide };

ScaleSemantics parse_scale_semantics(std::string_view name);
std::string_view scale_semantics_name(ScaleSemantics semantics);

struct PlacementConfig {
  double scale_fraction = 0.30;
  // Offset of the patch center from the box center, in units of box width/height.
  double offset_x = 0.0;
  double offset_y = 0.0;
  ScaleSemantics semantics = ScaleSemantics::kArea;

  void validate() const;
};

// Side length in pixels of a square paste for a box of the given pixel extent,
// before the 1-pixel floor.
double paste_side_for_box(double box_width_px, double box_height_px, const PlacementConfig& cfg);

// A square patch resized (bilinear) and pasted over a person box. Regions that
// fall outside the image are clipped. The paste is linear in the patch pixels,
// so backward() maps image-space gradients onto patch pixels exactly.
class PatchPaste {
 public:
  PatchPaste(int patch_side, const BoundingBox& box, int image_height, int image_width,
             const PlacementConfig& cfg);

  ImageBuffer apply(const ImageBuffer& image, const PatchElement& patch) const;
  // Gradient w.r.t. patch pixels given the gradient w.r.t. the composited image.
  ImageBuffer backward(const ImageBuffer& grad_image) const;

  int paste_side() const noexcept { return paste_side_; }
  int left() const noexcept { return left_; }
  int top() const noexcept { return top_; }
  // Set when the requested paste would be smaller than one pixel.
  bool clamped_to_minimum() const noexcept { return clamped_; }
  std::size_t pasted_pixel_count() const noexcept;

 private:
  int patch_side_;
  int image_height_;
  int image_width_;
  int paste_side_;
  int left_;
  int top_;
  bool clamped_;
  SamplingPlan plan_;
};

ImageBuffer place_patch(const ImageBuffer& image, const PatchElement& patch,
                        const BoundingBox& box, const PlacementConfig& cfg);

// out[y,x] = element[y mod side, x mod side]; tiles anchored at the image
// origin and truncated at the right and bottom edges.
ImageBuffer tile_element(const PatchElement& element, int height, int width);

// Replaces pixels where the mask is true with the tiled element.
ImageBuffer apply_masked_pattern(const ImageBuffer& image, const PatchElement& element,
                                 const BooleanMask& mask);

// Sums image-space gradients over every masked tile copy into one
// element-shaped gradient.
ImageBuffer masked_pattern_backward(const ImageBuffer& grad_image, const BooleanMask& mask,
                                    int element_side);

// Bilinear rescale to a new side, floored at 2 pixels.
PatchElement rescale_element(const PatchElement& element, int new_side);

}  // namespace tessera

#endif  // TESSERA_PLACEMENT_HPP_
