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

#include "tessera/resample.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tessera/error.hpp"

namespace tessera {

ResizeKernel parse_resize_kernel(std::string_view name) {
  if (name == "bilinear") return ResizeKernel::kBilinear;
  if (name == "nearest") return ResizeKernel::kNearest;
  if (name == "area") return ResizeKernel::kArea;
  fail(ErrorCode::kInvalidArgument, "unknown resize kernel '" + std::string(name) + "'");
}

std::string_view resize_kernel_name(ResizeKernel kernel) {
  switch (kernel) {
    case ResizeKernel::kBilinear: return "bilinear";
    case ResizeKernel::kNearest: return "nearest";
    case ResizeKernel::kArea: return "area";
  }
  return "bilinear";
}

SamplingPlan::SamplingPlan(int in_h, int in_w, int out_h, int out_w)
    : in_h_(in_h), in_w_(in_w), out_h_(out_h), out_w_(out_w) {
  if (in_h < 1 || in_w < 1 || out_h < 1 || out_w < 1) {
    fail(ErrorCode::kInvalidArgument, "sampling plan dimensions must be positive");
  }
  offsets_.reserve(static_cast<std::size_t>(out_h) * out_w + 1);
  offsets_.push_back(0);
}

void SamplingPlan::add_tap(int y, int x, double weight) {
  if (weight == 0.0) return;
  taps_.push_back({static_cast<std::uint32_t>(y * in_w_ + x), weight});
}

void SamplingPlan::finish_pixel() {
  offsets_.push_back(static_cast<std::uint32_t>(taps_.size()));
}

ImageBuffer SamplingPlan::apply(const ImageBuffer& input) const {
  if (input.height() != in_h_ || input.width() != in_w_) {
    fail(ErrorCode::kDimensionMismatch, "sampling plan input size mismatch");
  }
  const int channels = input.channels();
  ImageBuffer out(out_h_, out_w_, channels);
  const auto src = input.data();
  auto dst = out.data();
  const std::size_t n_out = static_cast<std::size_t>(out_h_) * out_w_;
  for (std::size_t p = 0; p < n_out; ++p) {
    for (std::uint32_t t = offsets_[p]; t < offsets_[p + 1]; ++t) {
      const auto& tap = taps_[t];
      const std::size_t s = static_cast<std::size_t>(tap.source) * channels;
      for (int c = 0; c < channels; ++c) dst[p * channels + c] += tap.weight * src[s + c];
    }
  }
  return out;
}

ImageBuffer SamplingPlan::apply_transpose(const ImageBuffer& grad_output) const {
  if (grad_output.height() != out_h_ || grad_output.width() != out_w_) {
    fail(ErrorCode::kDimensionMismatch, "sampling plan gradient size mismatch");
  }
  const int channels = grad_output.channels();
  ImageBuffer grad_in(in_h_, in_w_, channels);
  const auto g = grad_output.data();
  auto dst = grad_in.data();
  const std::size_t n_out = static_cast<std::size_t>(out_h_) * out_w_;
  for (std::size_t p = 0; p < n_out; ++p) {
    for (std::uint32_t t = offsets_[p]; t < offsets_[p + 1]; ++t) {
      const auto& tap = taps_[t];
      const std::size_t s = static_cast<std::size_t>(tap.source) * channels;
      for (int c = 0; c < channels; ++c) dst[s + c] += tap.weight * g[p * channels + c];
    }
  }
  return grad_in;
}

namespace {

// Edge-replicating linear taps along one axis, half-pixel centers.
void linear_taps(double src, int n, int& i0, int& i1, double& w1) {
  src = std::clamp(src, 0.0, static_cast<double>(n - 1));
  i0 = static_cast<int>(std::floor(src));
  i1 = std::min(i0 + 1, n - 1);
  w1 = src - i0;
}

// Box-filter coverage of output cell [o*scale, (o+1)*scale) over input cells.
std::vector<std::pair<int, double>> area_taps(int o, double scale, int n) {
  const double lo = o * scale;
  const double hi = std::min((o + 1) * scale, static_cast<double>(n));
  std::vector<std::pair<int, double>> taps;
  for (int i = static_cast<int>(std::floor(lo)); i < n && i < hi; ++i) {
    const double cover = std::min(hi, i + 1.0) - std::max(lo, static_cast<double>(i));
    if (cover > 0.0) taps.emplace_back(i, cover / (hi - lo));
  }
  return taps;
}

}  // namespace

SamplingPlan make_resize_plan(int in_h, int in_w, int out_h, int out_w, ResizeKernel kernel) {
  SamplingPlan plan(in_h, in_w, out_h, out_w);
  const double sy = static_cast<double>(in_h) / out_h;
  const double sx = static_cast<double>(in_w) / out_w;
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      switch (kernel) {
        case ResizeKernel::kNearest: {
          const int iy = std::min(static_cast<int>(std::floor((y + 0.5) * sy)), in_h - 1);
          const int ix = std::min(static_cast<int>(std::floor((x + 0.5) * sx)), in_w - 1);
          plan.add_tap(iy, ix, 1.0);
          break;
        }
        case ResizeKernel::kBilinear: {
          int y0, y1, x0, x1;
          double wy, wx;
          linear_taps((y + 0.5) * sy - 0.5, in_h, y0, y1, wy);
          linear_taps((x + 0.5) * sx - 0.5, in_w, x0, x1, wx);
          plan.add_tap(y0, x0, (1 - wy) * (1 - wx));
          plan.add_tap(y0, x1, (1 - wy) * wx);
          plan.add_tap(y1, x0, wy * (1 - wx));
          plan.add_tap(y1, x1, wy * wx);
          break;
        }
        case ResizeKernel::kArea: {
          for (const auto& [iy, wy] : area_taps(y, sy, in_h)) {
            for (const auto& [ix, wx] : area_taps(x, sx, in_w)) plan.add_tap(iy, ix, wy * wx);
          }
          break;
        }
      }
      plan.finish_pixel();
    }
  }
  return plan;
}

SamplingPlan make_affine_plan(int in_h, int in_w, int out_h, int out_w,
                              const AffineMap& m, ResizeKernel kernel) {
  SamplingPlan plan(in_h, in_w, out_h, out_w);
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      const double px = x + 0.5;
      const double py = y + 0.5;
      const double sx = m[0] * px + m[1] * py + m[2];
      const double sy = m[3] * px + m[4] * py + m[5];
      if (kernel == ResizeKernel::kNearest) {
        const int ix = static_cast<int>(std::floor(sx));
        const int iy = static_cast<int>(std::floor(sy));
        if (ix >= 0 && ix < in_w && iy >= 0 && iy < in_h) plan.add_tap(iy, ix, 1.0);
      } else {
        // Bilinear with zero padding: taps outside the grid contribute nothing.
        const double fx = sx - 0.5;
        const double fy = sy - 0.5;
        const int x0 = static_cast<int>(std::floor(fx));
        const int y0 = static_cast<int>(std::floor(fy));
        const double wx = fx - x0;
        const double wy = fy - y0;
        const int xs[2] = {x0, x0 + 1};
        const int ys[2] = {y0, y0 + 1};
        const double wxs[2] = {1 - wx, wx};
        const double wys[2] = {1 - wy, wy};
        for (int a = 0; a < 2; ++a) {
          if (ys[a] < 0 || ys[a] >= in_h) continue;
          for (int b = 0; b < 2; ++b) {
            if (xs[b] < 0 || xs[b] >= in_w) continue;
            plan.add_tap(ys[a], xs[b], wys[a] * wxs[b]);
          }
        }
      }
      plan.finish_pixel();
    }
  }
  return plan;
}

ImageBuffer resize(const ImageBuffer& image, int out_h, int out_w, ResizeKernel kernel) {
  if (image.height() == out_h && image.width() == out_w) return image;
  return make_resize_plan(image.height(), image.width(), out_h, out_w, kernel).apply(image);
}

}  // namespace tessera
