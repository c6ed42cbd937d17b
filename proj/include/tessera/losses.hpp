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

#ifndef TESSERA_LOSSES_HPP_
#define TESSERA_LOSSES_HPP_

#include <array>
#include <filesystem>
#include <string_view>
#include <vector>

#include "tessera/detector.hpp"
#include "tessera/image.hpp"

namespace tessera {

struct LossWeights {
  double detection = 1.0;
  double tv = 2.5;
  double nps = 0.1;

  void validate() const;
};

using Rgb = std::array<double, 3>;

// Colors a given printer can reproduce.
struct PrintableSet {
  std::vector<Rgb> colors;

  // One "r,g,b" triple of floats in [0,1] per line; '#' starts a comment and
  // a non-numeric first content line is treated as a header.
  static PrintableSet parse_csv(std::string_view text);
  static PrintableSet load_csv(const std::filesystem::path& path);
  void validate() const;
};

// Hard max by default. The smooth variant is tau * log(sum(exp(score / tau))),
// which spreads gradient over near-maximal cells.
struct DetectionLossOptions {
  bool smooth = false;
  double temperature = 0.05;
};

struct GridLoss {
  double value = 0.0;
  RawGrid gradient;  // d value / d(activated grid)
};

struct ElementLoss {
  double value = 0.0;
  ImageBuffer gradient;  // d value / d(element pixels)
};

// Max over cells and anchors of objectness * person probability, before any
// thresholding.
double detection_loss(const RawGrid& grid, int person_class_id,
                      const DetectionLossOptions& options = {});
GridLoss detection_loss_with_gradient(const RawGrid& grid, int person_class_id,
                                      const DetectionLossOptions& options = {});

inline constexpr double kTvEpsilon = 1e-8;

// Sum over interior positions and channels of
// sqrt(dx^2 + dy^2 + eps), divided by side^2.
double total_variation(const PatchElement& element);
ElementLoss total_variation_with_gradient(const PatchElement& element);

// Mean over pixels of the Euclidean distance to the nearest printable color.
double non_printability(const PatchElement& element, const PrintableSet& printable);
ElementLoss non_printability_with_gradient(const PatchElement& element,
                                           const PrintableSet& printable);

double combined_loss(const RawGrid& grid, const PatchElement& element, const LossWeights& weights,
                     const PrintableSet& printable, int person_class_id,
                     const DetectionLossOptions& options = {});

struct CombinedGradient {
  double value = 0.0;
  RawGrid grid_gradient;      // detection term, already scaled by its weight
  ImageBuffer element_gradient;  // tv + nps terms, already scaled
};

CombinedGradient combined_loss_with_gradient(const RawGrid& grid, const PatchElement& element,
                                             const LossWeights& weights,
                                             const PrintableSet& printable, int person_class_id,
                                             const DetectionLossOptions& options = {});

}  // namespace tessera

#endif  // TESSERA_LOSSES_HPP_
