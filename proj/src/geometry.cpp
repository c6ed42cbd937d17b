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

#include "tessera/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "tessera/error.hpp"

namespace tessera {

bool BoundingBox::is_valid() const noexcept {
  return cx >= 0.0 && cx <= 1.0 && cy >= 0.0 && cy <= 1.0 && w > 0.0 && w <= 1.0 &&
         h > 0.0 && h <= 1.0;
}

PixelRect BoundingBox::to_pixels(int image_height, int image_width) const noexcept {
  const double W = image_width;
  const double H = image_height;
  return {(cx - w / 2) * W, (cy - h / 2) * H, (cx + w / 2) * W, (cy + h / 2) * H};
}

bool BoundingBox::intersects_image() const noexcept {
  return cx + w / 2 > 0.0 && cx - w / 2 < 1.0 && cy + h / 2 > 0.0 && cy - h / 2 < 1.0;
}

double intersection_over_union(const BoundingBox& a, const BoundingBox& b) noexcept {
  const double ix = std::min(a.cx + a.w / 2, b.cx + b.w / 2) -
                    std::max(a.cx - a.w / 2, b.cx - b.w / 2);
  const double iy = std::min(a.cy + a.h / 2, b.cy + b.h / 2) -
                    std::max(a.cy - a.h / 2, b.cy - b.h / 2);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  const double uni = a.w * a.h + b.w * b.h - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

double ClothingPolygon::area() const noexcept {
  const std::size_t n = vertices.size();
  if (n < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    twice += vertices[j].x * vertices[i].y - vertices[i].x * vertices[j].y;
  }
  return std::abs(twice) / 2;
}

void ClothingPolygon::validate() const {
  if (vertices.size() < 3) {
    fail(ErrorCode::kPolygonDegenerate,
         "polygon '" + label + "' has " + std::to_string(vertices.size()) + " vertices");
  }
  if (!(area() > 0.0)) {
    fail(ErrorCode::kPolygonDegenerate, "polygon '" + label + "' has zero area");
  }
}

bool polygon_contains(const ClothingPolygon& polygon, Point p) noexcept {
  const auto& v = polygon.vertices;
  const std::size_t n = v.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    if ((v[i].y > p.y) != (v[j].y > p.y)) {
      const double x_cross =
          v[i].x + (p.y - v[i].y) * (v[j].x - v[i].x) / (v[j].y - v[i].y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

BooleanMask::BooleanMask(int height, int width, bool fill)
    : height_(height), width_(width) {
  if (height < 1 || width < 1) {
    fail(ErrorCode::kInvalidArgument, "mask dimensions must be positive");
  }
  bits_.assign(static_cast<std::size_t>(height) * width, fill ? 1 : 0);
}

std::size_t BooleanMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

BooleanMask BooleanMask::complement() const {
  BooleanMask out = *this;
  for (auto& b : out.bits_) b = b ? 0 : 1;
  return out;
}

BooleanMask rasterize_polygon(const ClothingPolygon& polygon, int height, int width) {
  polygon.validate();
  BooleanMask mask(height, width);
  const auto& v = polygon.vertices;
  const std::size_t n = v.size();
  std::vector<double> crossings;
  for (int y = 0; y < height; ++y) {
    const double yc = y + 0.5;
    crossings.clear();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      if ((v[i].y > yc) != (v[j].y > yc)) {
        crossings.push_back(v[i].x + (yc - v[i].y) * (v[j].x - v[i].x) / (v[j].y - v[i].y));
      }
    }
    std::sort(crossings.begin(), crossings.end());
    // Center x is inside iff an odd number of crossings lie strictly to its
    // right, i.e. x in [c[2k], c[2k+1]).
    for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
      const int first = std::max(0, static_cast<int>(std::ceil(crossings[k] - 0.5)));
      const int last = std::min(width - 1, static_cast<int>(std::ceil(crossings[k + 1] - 0.5)) - 1);
      for (int x = first; x <= last; ++x) mask.set(y, x, true);
    }
  }
  return mask;
}

BooleanMask union_masks(std::span<const BooleanMask> masks, int height, int width) {
  BooleanMask out(height, width);
  for (const auto& m : masks) {
    if (m.height() != height || m.width() != width) {
      fail(ErrorCode::kDimensionMismatch,
           "mask " + std::to_string(m.height()) + "x" + std::to_string(m.width()) +
               " does not match " + std::to_string(height) + "x" + std::to_string(width));
    }
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        if (m.at(y, x)) out.set(y, x, true);
      }
    }
  }
  return out;
}

}  // namespace tessera
