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

#include "tessera/transforms.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "tessera/error.hpp"
#include "tessera/image_io.hpp"

namespace tessera {

EotConfig EotConfig::identity() {
  EotConfig cfg;
  cfg.rotation_deg = 0.0;
  cfg.scale_min = cfg.scale_max = 1.0;
  cfg.noise_std = 0.0;
  cfg.brightness_min = cfg.brightness_max = 0.0;
  cfg.contrast_min = cfg.contrast_max = 1.0;
  return cfg;
}

void EotConfig::validate() const {
  if (!(rotation_deg >= 0.0)) fail(ErrorCode::kInvalidArgument, "rotation range must be >= 0");
  if (!(scale_min > 0.0 && scale_min <= scale_max)) {
    fail(ErrorCode::kInvalidArgument, "scale range must satisfy 0 < min <= max");
  }
  if (!(noise_std >= 0.0)) fail(ErrorCode::kInvalidArgument, "noise_std must be >= 0");
  if (!(brightness_min <= brightness_max)) {
    fail(ErrorCode::kInvalidArgument, "brightness range must be ordered");
  }
  if (!(contrast_min <= contrast_max)) {
    fail(ErrorCode::kInvalidArgument, "contrast range must be ordered");
  }
}

bool TransformParams::is_identity() const noexcept {
  return rotation_deg == 0.0 && scale == 1.0 && contrast == 1.0 && brightness == 0.0 &&
         noise_std == 0.0;
}

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  if (lo == hi) return lo;
  // Uses the top 53 bits so draws are identical across standard libraries.
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

}  // namespace

TransformParams sample_eot(const EotConfig& cfg, std::uint64_t draw_index) {
  cfg.validate();
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                    static_cast<std::uint32_t>(draw_index),
                    static_cast<std::uint32_t>(draw_index >> 32), 0x45u};
  std::mt19937_64 rng(seq);
  TransformParams p;
  p.rotation_deg = uniform(rng, -cfg.rotation_deg, cfg.rotation_deg);
  p.scale = uniform(rng, cfg.scale_min, cfg.scale_max);
  p.contrast = uniform(rng, cfg.contrast_min, cfg.contrast_max);
  p.brightness = uniform(rng, cfg.brightness_min, cfg.brightness_max);
  p.noise_std = cfg.noise_std;
  p.noise_seed = rng();
  return p;
}

namespace {

AffineMap scale_about_center(int h, int w, double scale) {
  const double cx = w / 2.0;
  const double cy = h / 2.0;
  // input = center + (output - center) / scale
  return {1.0 / scale, 0.0, cx - cx / scale, 0.0, 1.0 / scale, cy - cy / scale};
}

AffineMap rotation_about_center(int h, int w, double degrees) {
  const double rad = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(rad);
  const double s = std::sin(rad);
  const double cx = w / 2.0;
  const double cy = h / 2.0;
  // input = center + [[c, -s], [s, c]] (output - center), y pointing down.
  return {c, -s, cx - c * cx + s * cy, s, c, cy - s * cx - c * cy};
}

}  // namespace

ImageBuffer rotate_image(const ImageBuffer& image, double degrees, ResizeKernel interp) {
  const int h = image.height();
  const int w = image.width();
  return make_affine_plan(h, w, h, w, rotation_about_center(h, w, degrees), interp).apply(image);
}

EotPass apply_eot_traced(const ImageBuffer& image, const TransformParams& params,
                         ResizeKernel interp) {
  const int h = image.height();
  const int w = image.width();
  ImageBuffer current = image;
  std::optional<SamplingPlan> scale_plan;
  std::optional<SamplingPlan> rotate_plan;
  if (params.scale != 1.0) {
    scale_plan.emplace(make_affine_plan(h, w, h, w, scale_about_center(h, w, params.scale), interp));
    current = scale_plan->apply(current);
  }
  if (params.rotation_deg != 0.0) {
    rotate_plan.emplace(
        make_affine_plan(h, w, h, w, rotation_about_center(h, w, params.rotation_deg), interp));
    current = rotate_plan->apply(current);
  }
  auto values = current.data();
  if (params.contrast != 1.0) {
    for (double& v : values) v *= params.contrast;
  }
  if (params.brightness != 0.0) {
    for (double& v : values) v += params.brightness;
  }
  if (params.noise_std > 0.0) {
    std::mt19937_64 rng(params.noise_seed);
    std::normal_distribution<double> noise(0.0, params.noise_std);
    for (double& v : values) v += noise(rng);
  }
  // Gradients pass wherever the clamp left the value unchanged.
  std::vector<std::uint8_t> inside(values.size(), 1);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < 0.0 || values[i] > 1.0) {
      inside[i] = 0;
      values[i] = std::clamp(values[i], 0.0, 1.0);
    }
  }
  EotPass pass(std::move(current));
  pass.scale_plan_ = std::move(scale_plan);
  pass.rotate_plan_ = std::move(rotate_plan);
  pass.contrast_ = params.contrast;
  pass.inside_clamp_ = std::move(inside);
  return pass;
}

ImageBuffer EotPass::backward(const ImageBuffer& grad_output) const {
  require_same_shape(grad_output, output_, "EOT gradient");
  ImageBuffer grad = grad_output;
  auto g = grad.data();
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = inside_clamp_[i] ? g[i] * contrast_ : 0.0;
  }
  if (rotate_plan_) grad = rotate_plan_->apply_transpose(grad);
  if (scale_plan_) grad = scale_plan_->apply_transpose(grad);
  return grad;
}

ImageBuffer apply_eot(const ImageBuffer& image, const TransformParams& params,
                      ResizeKernel interp) {
  if (params.is_identity()) return image;
  return apply_eot_traced(image, params, interp).output();
}

DefenseSpec DefenseSpec::parse(std::string_view text) {
  DefenseSpec spec;
  if (text == "none") return spec;
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    fail(ErrorCode::kInvalidArgument, "defense must be none, resize:<f> or jpeg:<q>, got '" +
                                          std::string(text) + "'");
  }
  const std::string_view kind = text.substr(0, colon);
  const std::string value(text.substr(colon + 1));
  if (kind == "resize") {
    spec.kind = DefenseKind::kResize;
  } else if (kind == "jpeg") {
    spec.kind = DefenseKind::kJpeg;
  } else {
    fail(ErrorCode::kInvalidArgument, "unknown defense kind '" + std::string(kind) + "'");
  }
  std::size_t consumed = 0;
  try {
    spec.parameter = std::stod(value, &consumed);
  } catch (const std::exception&) {
    consumed = 0;
  }
  if (consumed != value.size() || value.empty()) {
    fail(ErrorCode::kInvalidArgument, "bad defense parameter '" + value + "'");
  }
  spec.validate();
  return spec;
}

std::string DefenseSpec::label() const {
  switch (kind) {
    case DefenseKind::kNone: return "none";
    case DefenseKind::kResize: return fmt::format("resize:{}", parameter);
    case DefenseKind::kJpeg: return fmt::format("jpeg:{}", parameter);
  }
  return "none";
}

void DefenseSpec::validate() const {
  if (kind == DefenseKind::kResize && !(parameter > 0.0 && parameter <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "resize factor must be in (0,1]");
  }
  if (kind == DefenseKind::kJpeg &&
      !(parameter >= 1.0 && parameter <= 100.0 && parameter == std::floor(parameter))) {
    fail(ErrorCode::kInvalidArgument, "JPEG quality must be an integer in [1,100]");
  }
}

ImageBuffer apply_defense(const ImageBuffer& image, const DefenseSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case DefenseKind::kNone:
      return image;
    case DefenseKind::kResize: {
      const int h = std::max(1, static_cast<int>(std::floor(image.height() * spec.parameter)));
      const int w = std::max(1, static_cast<int>(std::floor(image.width() * spec.parameter)));
      return resize(image, h, w, spec.kernel);
    }
    case DefenseKind::kJpeg:
      return jpeg_roundtrip(image, static_cast<int>(spec.parameter));
  }
  return image;
}

}  // namespace tessera
