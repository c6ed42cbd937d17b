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

#ifndef TESSERA_GEOMETRY_HPP_
#define TESSERA_GEOMETRY_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tessera {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

// Axis-aligned box in pixel coordinates, [x0,x1) x [y0,y1).
struct PixelRect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const noexcept { return x1 - x0; }
  double height() const noexcept { return y1 - y0; }
};

// Center/extent box normalized to the image extents (YOLO label layout).
struct BoundingBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;
  int class_id = 0;

  bool is_valid() const noexcept;
  PixelRect to_pixels(int image_height, int image_width) const noexcept;
  // True when the denormalized box overlaps the image area.
  bool intersects_image() const noexcept;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

double intersection_over_union(const BoundingBox& a, const BoundingBox& b) noexcept;

struct ClothingPolygon {
  std::vector<Point> vertices;
  std::string label;

  // Absolute shoelace area in square pixels.
  double area() const noexcept;
  // Throws PolygonDegenerate for fewer than 3 vertices or zero area.
  void validate() const;
};

// Even-odd crossing test.
bool polygon_contains(const ClothingPolygon& polygon, Point p) noexcept;

class BooleanMask {
 public:
  BooleanMask(int height, int width, bool fill = false);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }

  bool at(int y, int x) const noexcept { return bits_[offset(y, x)] != 0; }
  void set(int y, int x, bool value) noexcept { bits_[offset(y, x)] = value ? 1 : 0; }

  std::size_t count() const noexcept;
  BooleanMask complement() const;

  friend bool operator==(const BooleanMask&, const BooleanMask&) = default;

 private:
  std::size_t offset(int y, int x) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int height_;
  int width_;
  std::vector<std::uint8_t> bits_;
};

// A pixel is set iff its center (x+0.5, y+0.5) lies inside the polygon under
// the even-odd rule.
BooleanMask rasterize_polygon(const ClothingPolygon& polygon, int height, int width);

// Per-pixel OR. An empty list yields an all-false mask of the given size.
BooleanMask union_masks(std::span<const BooleanMask> masks, int height, int width);

}  // namespace tessera

#endif  // TESSERA_GEOMETRY_HPP_
