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

#ifndef TESSERA_RESAMPLE_HPP_
#define TESSERA_RESAMPLE_HPP_

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "tessera/image.hpp"

namespace tessera {

enum class ResizeKernel { kBilinear, kNearest, kArea };

ResizeKernel parse_resize_kernel(std::string_view name);
std::string_view resize_kernel_name(ResizeKernel kernel);

// A fixed linear resampling from an in_h x in_w grid to an out_h x out_w grid,
// shared across channels. Every geometric operation in the pipeline (resize,
// scaling, rotation) is one of these, so the backward pass is the transpose.
class SamplingPlan {
 public:
  struct Tap {
    std::uint32_t source;  // y * in_w + x
    double weight;
  };

  SamplingPlan(int in_h, int in_w, int out_h, int out_w);

  int in_height() const noexcept { return in_h_; }
  int in_width() const noexcept { return in_w_; }
  int out_height() const noexcept { return out_h_; }
  int out_width() const noexcept { return out_w_; }

  // Appends a tap for the output pixel currently being built. Output pixels
  // must be completed in row-major order via finish_pixel().
  void add_tap(int y, int x, double weight);
  void finish_pixel();

  ImageBuffer apply(const ImageBuffer& input) const;
  // Adjoint: accumulates output-space gradients back onto the input grid.
  ImageBuffer apply_transpose(const ImageBuffer& grad_output) const;

 private:
  int in_h_, in_w_, out_h_, out_w_;
  std::vector<Tap> taps_;
  std::vector<std::uint32_t> offsets_;  // out_h*out_w + 1 entries when complete
};

SamplingPlan make_resize_plan(int in_h, int in_w, int out_h, int out_w, ResizeKernel kernel);

// Row-major 2x3 matrix mapping output pixel-space coordinates (continuous, pixel
// centers at +0.5) to input pixel-space coordinates. Samples falling outside
// the input read as zero.
using AffineMap = std::array<double, 6>;

SamplingPlan make_affine_plan(int in_h, int in_w, int out_h, int out_w,
                              const AffineMap& output_to_input, ResizeKernel kernel);

ImageBuffer resize(const ImageBuffer& image, int out_h, int out_w,
                   ResizeKernel kernel = ResizeKernel::kBilinear);

}  // namespace tessera

#endif  // TESSERA_RESAMPLE_HPP_
