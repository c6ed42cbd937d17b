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

#ifndef TESSERA_SYNTHETIC_HPP_
#define TESSERA_SYNTHETIC_HPP_

#include <cstdint>
#include <vector>

#include "tessera/geometry.hpp"
#include "tessera/image.hpp"

namespace tessera {

// Procedural scenes for the reference detector: a stylized person (head,
// shirt, arms, trousers) over a cluttered background, plus an optional
// non-person object. Clothing regions are emitted as labeled polygons and
// drawn from exactly those polygons, so masks line up pixel for pixel.
struct SceneConfig {
  int size = 64;
  double person_probability = 0.85;
  double distractor_probability = 0.4;
  double min_person_height = 0.50;  // fraction of the image side
  double max_person_height = 0.85;
  double max_turn_deg = 20.0;       // torso turn, rendered as horizontal foreshortening
  int person_class_id = 0;
  int distractor_class_id = 1;
};

struct Scene {
  ImageBuffer image;
  std::vector<BoundingBox> boxes;
  std::vector<ClothingPolygon> polygons;
};

// Deterministic in seed.
Scene generate_scene(const SceneConfig& cfg, std::uint64_t seed);

// Like generate_scene but always contains exactly one person.
Scene generate_person_scene(const SceneConfig& cfg, std::uint64_t seed);

// Black-and-white checkerboard tile with the given square size.
ImageBuffer checkerboard(int height, int width, int square);

}  // namespace tessera

#endif  // TESSERA_SYNTHETIC_HPP_
