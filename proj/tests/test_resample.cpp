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

#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

#include "tessera/resample.hpp"
#include "test_support.hpp"

namespace tessera {
namespace {

using testing::dot;
using testing::random_image;

cv::Mat to_mat(const ImageBuffer& img) {
  cv::Mat m(img.height(), img.width(), CV_64FC(img.channels()));
  std::copy(img.data().begin(), img.data().end(), m.ptr<double>());
  return m;
}

// OpenCV keeps its interpolation coefficients in single precision.
TEST(Resize, BilinearMatchesOpenCv) {
  const int sizes[][4] = {{64, 64, 16, 16}, {64, 64, 32, 32}, {16, 16, 64, 64},
                          {37, 23, 64, 64}, {20, 30, 7, 11}, {5, 9, 13, 4}};
  std::uint64_t seed = 1;
  for (const auto& s : sizes) {
    const ImageBuffer img = random_image(s[0], s[1], 3, seed++);
    const ImageBuffer ours = resize(img, s[2], s[3], ResizeKernel::kBilinear);
    cv::Mat ref;
    cv::resize(to_mat(img), ref, cv::Size(s[3], s[2]), 0, 0, cv::INTER_LINEAR);
    const double* r = ref.ptr<double>();
    for (std::size_t i = 0; i < ours.size(); ++i) {
      ASSERT_NEAR(ours.data()[i], r[i], 1e-6) << s[0] << "x" << s[1] << "->" << s[2] << "x" << s[3];
    }
  }
}

TEST(Resize, AreaIsBlockMeanForIntegerFactors) {
  const ImageBuffer img = random_image(12, 8, 3, 4);
  const ImageBuffer ours = resize(img, 3, 2, ResizeKernel::kArea);
  for (int y = 0; y < 3; ++y) {
    for (int x = 0; x < 2; ++x) {
      for (int c = 0; c < 3; ++c) {
        double sum = 0.0;
        for (int dy = 0; dy < 4; ++dy) {
          for (int dx = 0; dx < 4; ++dx) sum += img.at(4 * y + dy, 4 * x + dx, c);
        }
        EXPECT_NEAR(ours.at(y, x, c), sum / 16.0, 1e-12);
      }
    }
  }
}

TEST(Resize, NearestPicksPixelContainingTheCenter) {
  const ImageBuffer img = random_image(6, 6, 1, 9);
  const ImageBuffer up = resize(img, 12, 12, ResizeKernel::kNearest);
  for (int y = 0; y < 12; ++y) {
    for (int x = 0; x < 12; ++x) EXPECT_EQ(up.at(y, x, 0), img.at(y / 2, x / 2, 0));
  }
  const ImageBuffer down = resize(img, 3, 3, ResizeKernel::kNearest);
  // Output center (y+0.5)*2 = 2y+1 falls in input pixel 2y+1.
  for (int y = 0; y < 3; ++y) {
    for (int x = 0; x < 3; ++x) EXPECT_EQ(down.at(y, x, 0), img.at(2 * y + 1, 2 * x + 1, 0));
  }
}

TEST(Resize, SameSizeIsIdentity) {
  const ImageBuffer img = random_image(7, 5, 3, 2);
  for (auto k : {ResizeKernel::kBilinear, ResizeKernel::kNearest, ResizeKernel::kArea}) {
    EXPECT_EQ(resize(img, 7, 5, k), img);
    EXPECT_EQ(make_resize_plan(7, 5, 7, 5, k).apply(img), img);
  }
}

TEST(SamplingPlan, TransposeIsAdjoint) {
  std::uint64_t seed = 100;
  const AffineMap rot{0.8, -0.6, 3.0, 0.6, 0.8, -2.0};
  for (auto k : {ResizeKernel::kBilinear, ResizeKernel::kNearest, ResizeKernel::kArea}) {
    for (const auto& plan : {make_resize_plan(9, 13, 5, 7, k), make_resize_plan(5, 4, 11, 9, k)}) {
      const ImageBuffer x = random_image(plan.in_height(), plan.in_width(), 3, seed++, -1, 1);
      const ImageBuffer y = random_image(plan.out_height(), plan.out_width(), 3, seed++, -1, 1);
      EXPECT_NEAR(dot(plan.apply(x), y), dot(x, plan.apply_transpose(y)), 1e-10);
    }
  }
  for (auto k : {ResizeKernel::kBilinear, ResizeKernel::kNearest}) {
    const SamplingPlan plan = make_affine_plan(10, 10, 10, 10, rot, k);
    const ImageBuffer x = random_image(10, 10, 1, seed++, -1, 1);
    const ImageBuffer y = random_image(10, 10, 1, seed++, -1, 1);
    EXPECT_NEAR(dot(plan.apply(x), y), dot(x, plan.apply_transpose(y)), 1e-10);
  }
}

TEST(SamplingPlan, IdentityAffineReproducesInput) {
  const ImageBuffer img = random_image(6, 8, 3, 5);
  const AffineMap id{1, 0, 0, 0, 1, 0};
  for (auto k : {ResizeKernel::kBilinear, ResizeKernel::kNearest}) {
    const ImageBuffer out = make_affine_plan(6, 8, 6, 8, id, k).apply(img);
    for (std::size_t i = 0; i < img.size(); ++i) EXPECT_NEAR(out.data()[i], img.data()[i], 1e-12);
  }
}

TEST(SamplingPlan, OutsideSamplesReadAsZero) {
  const ImageBuffer img(4, 4, 1, 1.0);
  const AffineMap shift{1, 0, 100, 0, 1, 0};
  const ImageBuffer out = make_affine_plan(4, 4, 4, 4, shift, ResizeKernel::kBilinear).apply(img);
  for (double v : out.data()) EXPECT_EQ(v, 0.0);
}

TEST(SamplingPlan, RejectsWrongInputSize) {
  const SamplingPlan plan = make_resize_plan(4, 4, 2, 2, ResizeKernel::kBilinear);
  EXPECT_TESSERA_ERROR(plan.apply(ImageBuffer(5, 4, 1)), ErrorCode::kDimensionMismatch);
}

TEST(ResizeKernel, ParseAndName) {
  for (auto k : {ResizeKernel::kBilinear, ResizeKernel::kNearest, ResizeKernel::kArea}) {
    EXPECT_EQ(parse_resize_kernel(resize_kernel_name(k)), k);
  }
  EXPECT_TESSERA_ERROR(parse_resize_kernel("lanczos"), ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace tessera
