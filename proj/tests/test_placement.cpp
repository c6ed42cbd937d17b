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

#include <cmath>
#include <random>

#include "tessera/placement.hpp"
#include "test_support.hpp"

namespace tessera {
namespace {

using testing::central_difference;
using testing::dot;
using testing::random_image;

PatchElement random_element(int side, std::uint64_t seed) {
  return PatchElement(random_image(side, side, 3, seed));
}

TEST(TileElement, DivisibleCanvasHoldsWholeTiles) {
  const PatchElement e = random_element(4, 1);
  const ImageBuffer out = tile_element(e, 8, 8);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      for (int c = 0; c < 3; ++c) EXPECT_EQ(out.at(y, x, c), e.at(y % 4, x % 4, c));
    }
  }
}

TEST(TileElement, EdgeTilesAreTruncated) {
  const PatchElement e = random_element(3, 2);
  const ImageBuffer out = tile_element(e, 8, 8);
  ASSERT_EQ(out.height(), 8);
  ASSERT_EQ(out.width(), 8);
  // Columns 6 and 7 hold the first two element columns; the third is cut off.
  for (int y = 0; y < 8; ++y) {
    EXPECT_EQ(out.at(y, 6, 0), e.at(y % 3, 0, 0));
    EXPECT_EQ(out.at(y, 7, 0), e.at(y % 3, 1, 0));
    EXPECT_EQ(out.at(6, y, 1), e.at(0, y % 3, 1));
    EXPECT_EQ(out.at(7, y, 1), e.at(1, y % 3, 1));
  }
}

TEST(TileElement, CanvasOfElementSizeIsCopy) {
  const PatchElement e = random_element(5, 3);
  EXPECT_EQ(tile_element(e, 5, 5), e.pixels());
}

TEST(TileElement, IsPeriodic) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int side = 2 + static_cast<int>(rng() % 6);
    const int h = 1 + static_cast<int>(rng() % 30), w = 1 + static_cast<int>(rng() % 30);
    const ImageBuffer out = tile_element(random_element(side, trial), h, w);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        for (int c = 0; c < 3; ++c) {
          if (y + side < h) {
            ASSERT_EQ(out.at(y, x, c), out.at(y + side, x, c));
          }
          if (x + side < w) {
            ASSERT_EQ(out.at(y, x, c), out.at(y, x + side, c));
          }
        }
      }
    }
  }
}

TEST(MaskedPattern, AllFalseMaskIsIdentity) {
  const ImageBuffer img = random_image(9, 7, 3, 4);
  EXPECT_EQ(apply_masked_pattern(img, random_element(3, 5), BooleanMask(9, 7)), img);
}

TEST(MaskedPattern, AllTrueMaskIsTiling) {
  const ImageBuffer img = random_image(9, 7, 3, 4);
  const PatchElement e = random_element(3, 5);
  EXPECT_EQ(apply_masked_pattern(img, e, BooleanMask(9, 7, true)), tile_element(e, 9, 7));
}

TEST(MaskedPattern, ChangesExactlyTheMaskedRegion) {
  const ImageBuffer img(12, 12, 3, 0.0);
  const PatchElement e(4, 3, 1.0);
  BooleanMask mask(12, 12);
  for (int y = 3; y < 8; ++y) {
    for (int x = 5; x < 10; ++x) mask.set(y, x, true);
  }
  const ImageBuffer out = apply_masked_pattern(img, e, mask);
  int differing = 0;
  for (int y = 0; y < 12; ++y) {
    for (int x = 0; x < 12; ++x) {
      bool diff = false;
      for (int c = 0; c < 3; ++c) diff |= out.at(y, x, c) != img.at(y, x, c);
      differing += diff;
    }
  }
  EXPECT_EQ(differing, 25);
}

TEST(MaskedPattern, UnmaskedPixelsAreUntouched) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const ImageBuffer img = random_image(15, 13, 3, 100 + trial);
    BooleanMask mask(15, 13);
    for (int y = 0; y < 15; ++y) {
      for (int x = 0; x < 13; ++x) mask.set(y, x, rng() % 2);
    }
    const ImageBuffer out = apply_masked_pattern(img, random_element(4, trial), mask);
    for (int y = 0; y < 15; ++y) {
      for (int x = 0; x < 13; ++x) {
        if (mask.at(y, x)) continue;
        for (int c = 0; c < 3; ++c) ASSERT_EQ(out.at(y, x, c), img.at(y, x, c));
      }
    }
  }
}

TEST(MaskedPattern, RejectsMismatchedMask) {
  EXPECT_TESSERA_ERROR(apply_masked_pattern(ImageBuffer(4, 4, 3), random_element(2, 1),
                                            BooleanMask(4, 5)),
                       ErrorCode::kDimensionMismatch);
}

// The derivative with respect to an element pixel aggregates every masked
// output position sharing that pixel's phase.
TEST(MaskedPattern, GradientAggregatesAllTiles) {
  const int side = 3;
  const ImageBuffer img = random_image(10, 11, 3, 8);
  const ImageBuffer weights = random_image(10, 11, 3, 9, -1, 1);
  BooleanMask mask(10, 11);
  std::mt19937_64 rng(10);
  for (int y = 0; y < 10; ++y) {
    for (int x = 0; x < 11; ++x) mask.set(y, x, rng() % 3 != 0);
  }
  // Scalar objective: a fixed quadratic of the composited image.
  auto f = [&](const ImageBuffer& pixels) {
    const ImageBuffer out = apply_masked_pattern(img, PatchElement(pixels), mask);
    double s = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) s += weights.data()[i] * out.data()[i] * out.data()[i];
    return s;
  };
  const PatchElement e = random_element(side, 12);
  const ImageBuffer out = apply_masked_pattern(img, e, mask);
  ImageBuffer grad_out(10, 11, 3);
  for (std::size_t i = 0; i < out.size(); ++i) grad_out.data()[i] = 2.0 * weights.data()[i] * out.data()[i];
  const ImageBuffer grad = masked_pattern_backward(grad_out, mask, side);
  for (std::size_t i = 0; i < grad.size(); ++i) {
    EXPECT_NEAR(grad.data()[i], central_difference(e.pixels(), i, f), 1e-6);
  }
}

TEST(PlacePatch, FullScaleCoversSquareBox) {
  const ImageBuffer img(40, 40, 3, 0.0);
  const PatchElement patch(5, 3, 1.0);
  PlacementConfig cfg;
  cfg.scale_fraction = 1.0;
  const BoundingBox box{0.5, 0.5, 0.5, 0.5, 0};
  const PatchPaste paste(5, box, 40, 40, cfg);
  EXPECT_EQ(paste.paste_side(), 20);
  EXPECT_EQ(paste.left(), 10);
  EXPECT_EQ(paste.top(), 10);
  const ImageBuffer out = paste.apply(img, patch);
  for (int y = 0; y < 40; ++y) {
    for (int x = 0; x < 40; ++x) {
      const bool inside = y >= 10 && y < 30 && x >= 10 && x < 30;
      EXPECT_NEAR(out.at(y, x, 0), inside ? 1.0 : 0.0, 1e-12);
    }
  }
}

TEST(PlacePatch, TinyPasteClampsToOnePixel) {
  PlacementConfig cfg;
  cfg.scale_fraction = 0.001;
  const PatchPaste paste(6, {0.5, 0.5, 0.1, 0.1, 0}, 20, 20, cfg);
  EXPECT_EQ(paste.paste_side(), 1);
  EXPECT_TRUE(paste.clamped_to_minimum());
  EXPECT_EQ(paste.pasted_pixel_count(), 1u);
}

TEST(PlacePatch, ClipsAtImageEdge) {
  const ImageBuffer img(30, 30, 3, 0.0);
  const PatchElement patch(4, 3, 1.0);
  PlacementConfig cfg;
  cfg.scale_fraction = 0.8;
  const BoundingBox box{0.95, 0.9, 0.4, 0.4, 0};
  const PatchPaste paste(4, box, 30, 30, cfg);
  // Brute-force count of paste positions that land inside the image.
  std::size_t expected = 0;
  for (int py = 0; py < paste.paste_side(); ++py) {
    for (int px = 0; px < paste.paste_side(); ++px) {
      const int y = paste.top() + py, x = paste.left() + px;
      expected += y >= 0 && y < 30 && x >= 0 && x < 30;
    }
  }
  EXPECT_LT(expected, static_cast<std::size_t>(paste.paste_side() * paste.paste_side()));
  EXPECT_EQ(paste.pasted_pixel_count(), expected);
  const ImageBuffer out = paste.apply(img, patch);
  std::size_t changed = 0;
  for (int y = 0; y < 30; ++y) {
    for (int x = 0; x < 30; ++x) changed += out.at(y, x, 0) != 0.0;
  }
  EXPECT_EQ(changed, expected);
}

TEST(PlacePatch, PastedAreaTracksScaleFraction) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int h = 40 + static_cast<int>(rng() % 200), w = 40 + static_cast<int>(rng() % 200);
    const BoundingBox box{0.5, 0.5, 0.1 + 0.8 * u(rng), 0.1 + 0.8 * u(rng), 0};
    PlacementConfig cfg;
    cfg.scale_fraction = 0.05 + 0.95 * u(rng);
    const PatchPaste paste(7, box, h, w, cfg);
    const PixelRect r = box.to_pixels(h, w);
    const double target = std::sqrt(cfg.scale_fraction * r.width() * r.height());
    EXPECT_LE(std::abs(paste.paste_side() - target), 0.5 + 1e-9);
  }
}

TEST(PlacePatch, SideSemanticsScalesLinearly) {
  PlacementConfig cfg;
  cfg.scale_fraction = 0.5;
  cfg.semantics = ScaleSemantics::kSide;
  EXPECT_DOUBLE_EQ(paste_side_for_box(40, 40, cfg), 20.0);
  cfg.semantics = ScaleSemantics::kArea;
  EXPECT_NEAR(paste_side_for_box(40, 40, cfg), std::sqrt(800.0), 1e-12);
}

TEST(PlacePatch, OffsetMovesCenter) {
  PlacementConfig cfg;
  cfg.scale_fraction = 0.25;
  cfg.offset_y = -0.25;
  const PatchPaste paste(4, {0.5, 0.5, 0.5, 0.5, 0}, 64, 64, cfg);
  EXPECT_EQ(paste.paste_side(), 16);
  EXPECT_EQ(paste.left(), 24);
  EXPECT_EQ(paste.top(), 16);
}

TEST(PlacePatch, BackwardIsAdjointOfPaste) {
  PlacementConfig cfg;
  cfg.scale_fraction = 0.6;
  const BoundingBox box{0.8, 0.3, 0.5, 0.6, 0};
  const PatchPaste paste(6, box, 25, 31, cfg);
  const ImageBuffer zero(25, 31, 3, 0.0);
  const ImageBuffer p = random_image(6, 6, 3, 30, -1, 1);
  const ImageBuffer g = random_image(25, 31, 3, 31, -1, 1);
  // With a zero background the paste is linear in the patch.
  EXPECT_NEAR(dot(paste.apply(zero, PatchElement(p)), g), dot(p, paste.backward(g)), 1e-10);
}

TEST(PlacePatch, Errors) {
  PlacementConfig cfg;
  const ImageBuffer img(20, 20, 3);
  const PatchElement patch(4, 3, 0.5);
  EXPECT_TESSERA_ERROR(place_patch(img, patch, {1.5, 1.5, 0.2, 0.2, 0}, cfg),
                       ErrorCode::kBoxOutsideImage);
  cfg.scale_fraction = 0.0;
  EXPECT_TESSERA_ERROR(place_patch(img, patch, {0.5, 0.5, 0.2, 0.2, 0}, cfg),
                       ErrorCode::kInvalidArgument);
  cfg.scale_fraction = 1.5;
  EXPECT_TESSERA_ERROR(cfg.validate(), ErrorCode::kInvalidArgument);
}

TEST(RescaleElement, ProducesRequestedSide) {
  const PatchElement e = random_element(8, 40);
  EXPECT_EQ(rescale_element(e, 16).side(), 16);
  EXPECT_EQ(rescale_element(e, 8), e);
}

}  // namespace
}  // namespace tessera
