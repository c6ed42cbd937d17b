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

#ifndef TESSERA_TESTS_TEST_SUPPORT_HPP_
#define TESSERA_TESTS_TEST_SUPPORT_HPP_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

#include "tessera/error.hpp"
#include "tessera/image.hpp"

// Expects `stmt` to throw tessera::Error with the given code.
#define EXPECT_TESSERA_ERROR(stmt, expected_code)                       \
  do {                                                                 \
    try {                                                              \
      stmt;                                                            \
      ADD_FAILURE() << "expected " #expected_code " from " #stmt;      \
    } catch (const ::tessera::Error& tessera_error_) {                 \
      EXPECT_EQ(tessera_error_.code(), expected_code) << tessera_error_.what(); \
    }                                                                  \
  } while (0)

namespace tessera::testing {

inline std::filesystem::path source_dir() { return TESSERA_SOURCE_DIR; }

inline ImageBuffer random_image(int h, int w, int c, std::uint64_t seed, double lo = 0.0,
                                double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  ImageBuffer img(h, w, c);
  for (double& v : img.data()) v = u(rng);
  return img;
}

inline double dot(const ImageBuffer& a, const ImageBuffer& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) s += a.data()[i] * b.data()[i];
  return s;
}

// Central difference of f with respect to one value of x.
inline double central_difference(ImageBuffer x, std::size_t index,
                                 const std::function<double(const ImageBuffer&)>& f,
                                 double h = 1e-5) {
  const double orig = x.data()[index];
  x.data()[index] = orig + h;
  const double plus = f(x);
  x.data()[index] = orig - h;
  const double minus = f(x);
  return (plus - minus) / (2.0 * h);
}

inline bool close(double a, double b, double rtol, double atol) {
  return std::abs(a - b) <= atol + rtol * std::abs(b);
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("tessera_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace tessera::testing

#endif  // TESSERA_TESTS_TEST_SUPPORT_HPP_
