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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "tessera/geometry.hpp"
#include "test_support.hpp"

namespace tessera {
namespace {

// Independent crossing-number oracle, written without sharing code with the
// library's scanline rasterizer. Coordinates are multiples of 1/8, so the test
// is done exactly in integers. Returns -1 when the point lies on an edge.
int brute_inside(const std::vector<Point>& v, double px, double py) {
  const auto q = [](double d) { return static_cast<long long>(std::llround(d * 8.0)); };
  const long long x = q(px), y = q(py);
  bool inside = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    const long long xi = q(v[i].x), yi = q(v[i].y), xj = q(v[j].x), yj = q(v[j].y);
    if ((yi > y) != (yj > y)) {
      long long lhs = (x - xi) * (yj - yi);
      long long rhs = (y - yi) * (xj - xi);
      if (yj < yi) std::swap(lhs, rhs);
      if (lhs == rhs) return -1;
      if (lhs < rhs) inside = !inside;
    }
  }
  return inside ? 1 : 0;
}

ClothingPolygon random_polygon(std::mt19937_64& rng, int h, int w) {
  std::uniform_int_distribution<int> count(3, 9);
  // Vertices sit on an eighth-pixel grid and never on a pixel-center row.
  std::uniform_int_distribution<int> qx(-8, 4 * w + 8);
  std::uniform_int_distribution<int> qy(-8, 4 * h + 8);
  for (;;) {
    ClothingPolygon p;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      p.vertices.push_back({qx(rng) / 4.0 + 0.125, qy(rng) / 4.0 + 0.125});
    }
    if (p.area() > 1.0) return p;
  }
}

TEST(Rasterize, AxisAlignedSquare) {
  const ClothingPolygon sq{{{0, 0}, {4, 0}, {4, 4}, {0, 4}}, "shirt"};
  const BooleanMask m = rasterize_polygon(sq, 8, 8);
  EXPECT_EQ(m.count(), 16u);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) EXPECT_EQ(m.at(y, x), x < 4 && y < 4) << y << "," << x;
  }
}

TEST(Rasterize, CoveringPolygonFillsImage) {
  const ClothingPolygon big{{{-1, -1}, {20, -1}, {20, 20}, {-1, 20}}, "coat"};
  EXPECT_EQ(rasterize_polygon(big, 6, 9).count(), 54u);
}

TEST(Rasterize, DegenerateInputs) {
  const ClothingPolygon two{{{0, 0}, {4, 4}}, "shirt"};
  EXPECT_TESSERA_ERROR(rasterize_polygon(two, 8, 8), ErrorCode::kPolygonDegenerate);
  const ClothingPolygon line{{{0, 0}, {2, 2}, {4, 4}}, "shirt"};
  EXPECT_TESSERA_ERROR(rasterize_polygon(line, 8, 8), ErrorCode::kPolygonDegenerate);
}

TEST(Rasterize, MatchesBruteForcePointInPolygon) {
  std::mt19937_64 rng(20260101);
  for (int trial = 0; trial < 300; ++trial) {
    const int h = 5 + trial % 17;
    const int w = 4 + (trial * 7) % 19;
    const ClothingPolygon p = random_polygon(rng, h, w);
    const BooleanMask m = rasterize_polygon(p, h, w);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const int expected = brute_inside(p.vertices, x + 0.5, y + 0.5);
        if (expected < 0) continue;
        ASSERT_EQ(m.at(y, x), expected == 1)
            << "trial " << trial << " pixel " << y << "," << x;
      }
    }
  }
}

TEST(Rasterize, OrientationIndependent) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    ClothingPolygon p = random_polygon(rng, 16, 16);
    ClothingPolygon r = p;
    std::reverse(r.vertices.begin(), r.vertices.end());
    EXPECT_EQ(rasterize_polygon(p, 16, 16), rasterize_polygon(r, 16, 16));
  }
}

TEST(Rasterize, ContainsAgreesWithRasterizer) {
  std::mt19937_64 rng(99);
  const ClothingPolygon p = random_polygon(rng, 12, 12);
  const BooleanMask m = rasterize_polygon(p, 12, 12);
  for (int y = 0; y < 12; ++y) {
    for (int x = 0; x < 12; ++x) EXPECT_EQ(m.at(y, x), polygon_contains(p, {x + 0.5, y + 0.5}));
  }
}

TEST(Rasterize, ConvexCountWithinPerimeterOfArea) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> radius(2.0, 14.0);
  std::uniform_real_distribution<double> center(10.0, 22.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double r = radius(rng);
    const double cx = center(rng);
    const double cy = center(rng);
    ClothingPolygon p;
    const int n = 3 + trial % 9;
    for (int i = 0; i < n; ++i) {
      const double a = 2.0 * M_PI * i / n + 0.1 * trial;
      p.vertices.push_back({cx + r * std::cos(a), cy + r * std::sin(a)});
    }
    double perimeter = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto& a = p.vertices[i];
      const auto& b = p.vertices[(i + 1) % n];
      perimeter += std::hypot(a.x - b.x, a.y - b.y);
    }
    const double count = static_cast<double>(rasterize_polygon(p, 32, 32).count());
    EXPECT_LE(std::abs(count - p.area()), perimeter) << "trial " << trial;
  }
}

TEST(Polygon, ShoelaceArea) {
  const ClothingPolygon tri{{{0, 0}, {4, 0}, {0, 3}}, "shirt"};
  EXPECT_DOUBLE_EQ(tri.area(), 6.0);
  const ClothingPolygon cw{{{0, 0}, {0, 3}, {4, 0}}, "shirt"};
  EXPECT_DOUBLE_EQ(cw.area(), 6.0);
}

BooleanMask random_mask(std::mt19937_64& rng, int h, int w) {
  BooleanMask m(h, w);
  std::bernoulli_distribution coin(0.3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) m.set(y, x, coin(rng));
  }
  return m;
}

TEST(UnionMasks, Examples) {
  const BooleanMask f(4, 4);
  EXPECT_EQ(union_masks(std::vector<BooleanMask>{f, f}, 4, 4), f);
  std::mt19937_64 rng(1);
  const BooleanMask m = random_mask(rng, 5, 6);
  EXPECT_EQ(union_masks(std::vector<BooleanMask>{m, m.complement()}, 5, 6).count(), 30u);
  BooleanMask a(4, 4), b(4, 4);
  a.set(0, 0, true), a.set(0, 1, true), a.set(1, 0, true), a.set(1, 1, true);
  b.set(3, 3, true), b.set(3, 2, true), b.set(2, 3, true), b.set(2, 2, true);
  EXPECT_EQ(union_masks(std::vector<BooleanMask>{a, b}, 4, 4).count(), 8u);
  EXPECT_EQ(union_masks({}, 3, 2), BooleanMask(3, 2));
}

TEST(UnionMasks, DimensionMismatch) {
  EXPECT_TESSERA_ERROR(union_masks(std::vector<BooleanMask>{BooleanMask(4, 4), BooleanMask(4, 5)}, 4, 4),
                       ErrorCode::kDimensionMismatch);
}

TEST(UnionMasks, AlgebraicProperties) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const BooleanMask a = random_mask(rng, 6, 5);
    const BooleanMask b = random_mask(rng, 6, 5);
    const BooleanMask c = random_mask(rng, 6, 5);
    const auto u = [](std::vector<BooleanMask> ms) { return union_masks(ms, 6, 5); };
    EXPECT_EQ(u({a}), a);
    EXPECT_EQ(u({a, b}), u({b, a}));
    EXPECT_EQ(u({u({a, b}), c}), u({a, u({b, c})}));
  }
}

TEST(BoundingBox, ValidityAndPixels) {
  const BoundingBox b{0.5, 0.5, 0.2, 0.4, 0};
  EXPECT_TRUE(b.is_valid());
  const PixelRect r = b.to_pixels(100, 200);
  EXPECT_DOUBLE_EQ(r.x0, 80.0);
  EXPECT_DOUBLE_EQ(r.x1, 120.0);
  EXPECT_DOUBLE_EQ(r.y0, 30.0);
  EXPECT_DOUBLE_EQ(r.y1, 70.0);
  EXPECT_FALSE((BoundingBox{1.5, 0.5, 0.2, 0.2, 0}).is_valid());
  EXPECT_FALSE((BoundingBox{0.5, 0.5, 0.0, 0.2, 0}).is_valid());
}

TEST(BoundingBox, IntersectionOverUnion) {
  const BoundingBox a{0.5, 0.5, 0.2, 0.2, 0};
  EXPECT_NEAR(intersection_over_union(a, a), 1.0, 1e-12);
  const BoundingBox b{0.6, 0.5, 0.2, 0.2, 0};
  // Overlap 0.1 x 0.2 over union 0.04 + 0.04 - 0.02.
  EXPECT_NEAR(intersection_over_union(a, b), 0.02 / 0.06, 1e-12);
  EXPECT_DOUBLE_EQ(intersection_over_union(a, {0.9, 0.9, 0.1, 0.1, 0}), 0.0);
}

}  // namespace
}  // namespace tessera
