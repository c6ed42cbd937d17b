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

#include "tessera/losses.hpp"
#include "test_support.hpp"

namespace tessera {
namespace {

using testing::central_difference;
using testing::close;
using testing::random_image;

RawGrid random_grid(std::uint64_t seed) {
  RawGrid g(4, 2, {{0.3, 0.6}});
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int gy = 0; gy < 4; ++gy) {
    for (int gx = 0; gx < 4; ++gx) {
      const double p = u(rng);
      g.at(gy, gx, 0, RawGrid::kObjectness) = u(rng);
      g.at(gy, gx, 0, RawGrid::kFirstClass) = p;
      g.at(gy, gx, 0, RawGrid::kFirstClass + 1) = 1.0 - p;
    }
  }
  return g;
}

PrintableSet black_white() { return PrintableSet{{{0, 0, 0}, {1, 1, 1}}}; }

TEST(DetectionLoss, ZeroObjectnessGivesZero) {
  EXPECT_EQ(detection_loss(RawGrid(4, 2, {{0.3, 0.6}}), 0), 0.0);
}

TEST(DetectionLoss, SingleCellProduct) {
  RawGrid g(4, 2, {{0.3, 0.6}});
  g.at(2, 1, 0, RawGrid::kObjectness) = 0.8;
  g.at(2, 1, 0, RawGrid::kFirstClass) = 0.5;
  EXPECT_NEAR(detection_loss(g, 0), 0.4, 1e-15);
}

TEST(DetectionLoss, HardMaxMatchesBruteForce) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const RawGrid g = random_grid(seed);
    double best = 0.0;
    for (int gy = 0; gy < 4; ++gy) {
      for (int gx = 0; gx < 4; ++gx) {
        best = std::max(best, g.objectness(gy, gx, 0) * g.class_probability(gy, gx, 0, 0));
      }
    }
    EXPECT_EQ(detection_loss(g, 0), best);
  }
}

TEST(DetectionLoss, SmoothMaxApproachesHardMax) {
  const RawGrid g = random_grid(3);
  const double hard = detection_loss(g, 0);
  DetectionLossOptions opt;
  opt.smooth = true;
  opt.temperature = 1e-9;
  EXPECT_NEAR(detection_loss(g, 0, opt), hard, 1e-6);
  opt.temperature = 0.05;
  EXPECT_GE(detection_loss(g, 0, opt), hard);
  opt.temperature = 0.0;
  EXPECT_TESSERA_ERROR(detection_loss(g, 0, opt), ErrorCode::kInvalidArgument);
}

TEST(DetectionLoss, GradientsMatchFiniteDifferences) {
  for (bool smooth : {false, true}) {
    DetectionLossOptions opt;
    opt.smooth = smooth;
    RawGrid g = random_grid(9);
    const GridLoss loss = detection_loss_with_gradient(g, 0, opt);
    auto values = g.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double orig = values[i];
      values[i] = orig + 1e-6;
      const double plus = detection_loss(g, 0, opt);
      values[i] = orig - 1e-6;
      const double minus = detection_loss(g, 0, opt);
      values[i] = orig;
      EXPECT_TRUE(close(loss.gradient.values()[i], (plus - minus) / 2e-6, 1e-3, 1e-5))
          << (smooth ? "smooth " : "hard ") << i;
    }
  }
}

TEST(TotalVariation, ConstantElementIsNearZero) {
  const PatchElement e(6, 3, 0.4);
  EXPECT_LE(total_variation(e), std::sqrt(kTvEpsilon) * 6 * 6 * 3);
}

TEST(TotalVariation, TwoByTwoStripes) {
  const PatchElement e(ImageBuffer(2, 2, 1, std::vector<double>{0, 1, 0, 1}));
  EXPECT_NEAR(total_variation(e), std::sqrt(1.0 + kTvEpsilon) / 4.0, 1e-15);
  EXPECT_NEAR(total_variation(e), 0.25, 1e-8);
}

TEST(TotalVariation, StripesExceedTheirBlur) {
  ImageBuffer stripes(8, 8, 3);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      for (int c = 0; c < 3; ++c) stripes.at(y, x, c) = x % 2;
    }
  }
  // Horizontal Gaussian blur, kernel (1,2,1)/4 with edge replication.
  ImageBuffer blurred(8, 8, 3);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      for (int c = 0; c < 3; ++c) {
        const double l = stripes.at(y, std::max(0, x - 1), c);
        const double r = stripes.at(y, std::min(7, x + 1), c);
        blurred.at(y, x, c) = (l + 2.0 * stripes.at(y, x, c) + r) / 4.0;
      }
    }
  }
  EXPECT_GT(total_variation(PatchElement(stripes)), total_variation(PatchElement(blurred)));
}

TEST(TotalVariation, InvariantUnderIntensityShift) {
  const ImageBuffer img = random_image(8, 8, 3, 4);
  ImageBuffer shifted = img;
  for (double& v : shifted.data()) v += 0.37;
  EXPECT_NEAR(total_variation(PatchElement(img)), total_variation(PatchElement(shifted)), 1e-12);
}

TEST(NonPrintability, ExactColorsScoreZero) {
  const PatchElement e(4, 3, 1.0);
  EXPECT_EQ(non_printability(e, black_white()), 0.0);
}

TEST(NonPrintability, MidGrayAgainstBlackAndWhite) {
  const PatchElement e(ImageBuffer(2, 2, 3, 0.5));
  EXPECT_NEAR(non_printability(e, black_white()), std::sqrt(0.75), 1e-12);
  EXPECT_NEAR(non_printability(e, black_white()), 0.8660, 1e-4);
}

TEST(NonPrintability, SupersetNeverScoresHigher) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const PatchElement e(random_image(6, 6, 3, 5));
  PrintableSet set = black_white();
  double previous = non_printability(e, set);
  for (int i = 0; i < 20; ++i) {
    set.colors.push_back({u(rng), u(rng), u(rng)});
    const double now = non_printability(e, set);
    EXPECT_LE(now, previous);
    previous = now;
  }
}

TEST(CombinedLoss, Linearity) {
  const RawGrid g = random_grid(1);
  const PatchElement e(random_image(8, 8, 3, 2));
  const PrintableSet p = black_white();
  EXPECT_DOUBLE_EQ(combined_loss(g, e, {1, 0, 0}, p, 0), detection_loss(g, 0));
  const double expect = 0.7 * detection_loss(g, 0) + 1.3 * total_variation(e) +
                        0.2 * non_printability(e, p);
  EXPECT_NEAR(combined_loss(g, e, {0.7, 1.3, 0.2}, p, 0), expect, 1e-12);
}

TEST(CombinedLoss, UnitComponentsSumToThree) {
  RawGrid g(4, 2, {{0.3, 0.6}});
  g.at(0, 0, 0, RawGrid::kObjectness) = 1.0;
  g.at(0, 0, 0, RawGrid::kFirstClass) = 1.0;
  // A 2x2 single-step element has TV = 1/4 per channel, so three channels of
  // a (0,1) step give 0.75. Pair it with a printable set one unit away.
  ImageBuffer pixels(2, 2, 3);
  for (int y = 0; y < 2; ++y) {
    for (int c = 0; c < 3; ++c) pixels.at(y, 1, c) = 1.0;
  }
  const PatchElement e(pixels);
  const PrintableSet far{{{0, 0, 1}, {1, 1, 0}}};
  const double tv = total_variation(e);
  const double nps = non_printability(e, far);
  ASSERT_NEAR(nps, 1.0, 1e-12);
  EXPECT_NEAR(combined_loss(g, e, {1, 1 / tv, 1}, far, 0), 3.0, 1e-12);
}

TEST(CombinedLoss, ComponentGradientsMatchFiniteDifferences) {
  const PrintableSet p = PrintableSet::load_csv(testing::source_dir() / "data/printable_colors.csv");
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const ImageBuffer x = random_image(8, 8, 3, 50 + seed);
    const LossWeights w{1.0, 0.8, 0.3};
    const CombinedGradient cg = combined_loss_with_gradient(random_grid(seed), PatchElement(x), w, p, 0);
    const ElementLoss tv = total_variation_with_gradient(PatchElement(x));
    const ElementLoss nps = non_printability_with_gradient(PatchElement(x), p);
    const auto tv_f = [](const ImageBuffer& v) { return total_variation(PatchElement(v)); };
    const auto nps_f = [&](const ImageBuffer& v) { return non_printability(PatchElement(v), p); };
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double tv_fd = central_difference(x, i, tv_f, 1e-6);
      const double nps_fd = central_difference(x, i, nps_f, 1e-6);
      EXPECT_TRUE(close(tv.gradient.data()[i], tv_fd, 1e-3, 1e-5)) << "tv " << i;
      EXPECT_TRUE(close(nps.gradient.data()[i], nps_fd, 1e-3, 1e-5)) << "nps " << i;
      EXPECT_NEAR(cg.element_gradient.data()[i],
                  w.tv * tv.gradient.data()[i] + w.nps * nps.gradient.data()[i], 1e-12);
    }
  }
}

TEST(Losses, NonNegative) {
  const PrintableSet p = black_white();
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const PatchElement e(random_image(5, 5, 3, seed));
    EXPECT_GE(detection_loss(random_grid(seed), 0), 0.0);
    EXPECT_GE(total_variation(e), 0.0);
    EXPECT_GE(non_printability(e, p), 0.0);
  }
}

TEST(LossWeights, Validation) {
  EXPECT_TESSERA_ERROR((LossWeights{0.0, 1, 1}).validate(), ErrorCode::kInvalidArgument);
  EXPECT_TESSERA_ERROR((LossWeights{1.0, -1, 1}).validate(), ErrorCode::kInvalidArgument);
}

TEST(PrintableSet, ParsesCommentsAndHeader) {
  const PrintableSet s = PrintableSet::parse_csv("# calibration\nr,g,b\n0,0,0\n1, 1, 1  # white\n\n");
  ASSERT_EQ(s.colors.size(), 2u);
  EXPECT_EQ(s.colors[1], (Rgb{1, 1, 1}));
  EXPECT_TESSERA_ERROR(PrintableSet::parse_csv("0,0,0\nfoo\n"), ErrorCode::kParseError);
  EXPECT_TESSERA_ERROR(PrintableSet::parse_csv("0,0,1.5\n"), ErrorCode::kRangeError);
  EXPECT_TESSERA_ERROR(PrintableSet::parse_csv("r,g,b\n"), ErrorCode::kInvalidArgument);
  EXPECT_TESSERA_ERROR(PrintableSet::parse_csv("0,0,0\n0,0,0\n"), ErrorCode::kInvalidArgument);
}

TEST(PrintableSet, ShippedSetIsValid) {
  const PrintableSet s = PrintableSet::load_csv(testing::source_dir() / "data/printable_colors.csv");
  EXPECT_EQ(s.colors.size(), 30u);
}

}  // namespace
}  // namespace tessera
