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

#ifndef TESSERA_TRANSFORMS_HPP_
#define TESSERA_TRANSFORMS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tessera/image.hpp"
#include "tessera/resample.hpp"

namespace tessera {

// Uniform ranges for the expectation-over-transformations augmentation.
struct EotConfig {
  double rotation_deg = 20.0;  // draws from [-rotation_deg, rotation_deg]
  double scale_min = 0.8;
  double scale_max = 1.2;
  double noise_std = 0.02;
  double brightness_min = -0.1;
  double brightness_max = 0.1;
  double contrast_min = 0.9;
  double contrast_max = 1.1;
  std::uint64_t seed = 0;

  static EotConfig identity();
  void validate() const;
};

struct TransformParams {
  double rotation_deg = 0.0;
  double scale = 1.0;
  double contrast = 1.0;
  double brightness = 0.0;
  double noise_std = 0.0;
  std::uint64_t noise_seed = 0;

  bool is_identity() const noexcept;
  friend bool operator==(const TransformParams&, const TransformParams&) = default;
};

// Deterministic in (cfg.seed, draw_index).
TransformParams sample_eot(const EotConfig& cfg, std::uint64_t draw_index);

// Forward result of the augmentation plus what is needed to pull gradients
// back to the input. Order: scale, rotation about the center, contrast,
// brightness, additive Gaussian noise, clamp to [0,1].
class EotPass {
 public:
  const ImageBuffer& output() const noexcept { return output_; }
  ImageBuffer backward(const ImageBuffer& grad_output) const;

 private:
  friend EotPass apply_eot_traced(const ImageBuffer&, const TransformParams&, ResizeKernel);

  explicit EotPass(ImageBuffer output) : output_(std::move(output)) {}

  ImageBuffer output_;
  std::optional<SamplingPlan> scale_plan_;
  std::optional<SamplingPlan> rotate_plan_;
  double contrast_ = 1.0;
  std::vector<std::uint8_t> inside_clamp_;  // 1 where the clamp passed gradients
};

// kBilinear is the training interpolation; kNearest exists for exact tests.
EotPass apply_eot_traced(const ImageBuffer& image, const TransformParams& params,
                         ResizeKernel interp = ResizeKernel::kBilinear);
ImageBuffer apply_eot(const ImageBuffer& image, const TransformParams& params,
                      ResizeKernel interp = ResizeKernel::kBilinear);

// Rotation of content about the image center; positive angles turn the content
// counterclockwise as displayed.
ImageBuffer rotate_image(const ImageBuffer& image, double degrees, ResizeKernel interp);

enum class DefenseKind { kNone, kResize, kJpeg };

struct DefenseSpec {
  DefenseKind kind = DefenseKind::kNone;
  // Resize factor in (0,1] or JPEG quality in [1,100].
  double parameter = 0.0;
  ResizeKernel kernel = ResizeKernel::kBilinear;

  // Accepts "none", "resize:<factor>", "jpeg:<quality>".
  static DefenseSpec parse(std::string_view text);
  std::string label() const;
  void validate() const;
};

ImageBuffer apply_defense(const ImageBuffer& image, const DefenseSpec& spec);

}  // namespace tessera

#endif  // TESSERA_TRANSFORMS_HPP_
