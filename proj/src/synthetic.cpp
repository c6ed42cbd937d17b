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

#include "tessera/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

namespace tessera {
namespace {

using Rgb = std::array<double, 3>;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform(double lo = 0.0, double hi = 1.0) {
    return lo + (hi - lo) * (static_cast<double>(engine_() >> 11) * 0x1.0p-53);
  }
  int integer(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  bool chance(double p) { return uniform() < p; }
  Rgb color(double lo = 0.0, double hi = 1.0) {
    return {uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)};
  }
  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

// Cheap deterministic per-pixel hash noise in [0,1).
double hash_noise(std::uint64_t seed, int x, int y) {
  std::uint64_t h = seed ^ (static_cast<std::uint64_t>(x) * 0x9E3779B97F4A7C15ull) ^
                    (static_cast<std::uint64_t>(y) * 0xC2B2AE3D27D4EB4Full);
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdull;
  h ^= h >> 33;
  h *= 0xc4ceb9fe1a85ec53ull;
  h ^= h >> 33;
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

struct Texture {
  enum Kind { kSolid, kHStripes, kVStripes, kChecker, kNoise, kGradient } kind = kSolid;
  Rgb a{};
  Rgb b{};
  double period = 4.0;
  std::uint64_t seed = 0;

  Rgb sample(int x, int y) const {
    double t = 0.0;
    switch (kind) {
      case kSolid: t = 0.0; break;
      case kHStripes: t = std::fmod(std::floor(y / period), 2.0); break;
      case kVStripes: t = std::fmod(std::floor(x / period), 2.0); break;
      case kChecker:
        t = std::fmod(std::floor(x / period) + std::floor(y / period), 2.0);
        break;
      case kNoise: t = hash_noise(seed, x, y); break;
      case kGradient: t = 0.5 + 0.5 * std::sin((x + y) / (period * 2.0)); break;
    }
    return {a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t, a[2] + (b[2] - a[2]) * t};
  }
};

Texture random_clothing(Rng& rng) {
  Texture tex;
  const double u = rng.uniform();
  tex.kind = u < 0.3   ? Texture::kSolid
             : u < 0.45 ? Texture::kHStripes
             : u < 0.6  ? Texture::kVStripes
             : u < 0.75 ? Texture::kChecker
             : u < 0.9  ? Texture::kNoise
                        : Texture::kGradient;
  tex.a = rng.color();
  tex.b = rng.color();
  tex.period = rng.uniform(1.5, 6.0);
  tex.seed = rng.bits();
  return tex;
}

void put(ImageBuffer& img, int x, int y, const Rgb& c) {
  if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) return;
  for (int k = 0; k < 3; ++k) img.at(y, x, k) = c[k];
}

void fill_rect(ImageBuffer& img, double x0, double y0, double x1, double y1, const Texture& tex) {
  const int xa = std::max(0, static_cast<int>(std::ceil(x0 - 0.5)));
  const int xb = std::min(img.width(), static_cast<int>(std::ceil(x1 - 0.5)));
  const int ya = std::max(0, static_cast<int>(std::ceil(y0 - 0.5)));
  const int yb = std::min(img.height(), static_cast<int>(std::ceil(y1 - 0.5)));
  for (int y = ya; y < yb; ++y) {
    for (int x = xa; x < xb; ++x) put(img, x, y, tex.sample(x, y));
  }
}

void fill_ellipse(ImageBuffer& img, double cx, double cy, double rx, double ry, const Rgb& c) {
  const int xa = std::max(0, static_cast<int>(std::floor(cx - rx)));
  const int xb = std::min(img.width() - 1, static_cast<int>(std::ceil(cx + rx)));
  const int ya = std::max(0, static_cast<int>(std::floor(cy - ry)));
  const int yb = std::min(img.height() - 1, static_cast<int>(std::ceil(cy + ry)));
  for (int y = ya; y <= yb; ++y) {
    for (int x = xa; x <= xb; ++x) {
      const double dx = (x + 0.5 - cx) / rx;
      const double dy = (y + 0.5 - cy) / ry;
      if (dx * dx + dy * dy <= 1.0) put(img, x, y, c);
    }
  }
}

void fill_polygon(ImageBuffer& img, const ClothingPolygon& poly, const Texture& tex) {
  const BooleanMask mask = rasterize_polygon(poly, img.height(), img.width());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (mask.at(y, x)) put(img, x, y, tex.sample(x, y));
    }
  }
}

void draw_background(ImageBuffer& img, Rng& rng) {
  const int n = img.width();
  const Rgb sky = rng.color(0.25, 0.9);
  const Rgb ground = rng.color(0.15, 0.7);
  const double horizon = rng.uniform(0.35, 0.75) * n;
  const std::uint64_t grain = rng.bits();
  for (int y = 0; y < img.height(); ++y) {
    const Rgb& base = y < horizon ? sky : ground;
    const double shade = 0.85 + 0.3 * y / img.height();
    for (int x = 0; x < n; ++x) {
      const double jitter = 0.06 * (hash_noise(grain, x, y) - 0.5);
      for (int k = 0; k < 3; ++k) img.at(y, x, k) = std::clamp(base[k] * shade + jitter, 0.0, 1.0);
    }
  }
  // Clutter: blocky "buildings" and round "bushes".
  const int clutter = rng.integer(2, 6);
  for (int i = 0; i < clutter; ++i) {
    if (rng.chance(0.5)) {
      Texture tex;
      tex.kind = rng.chance(0.5) ? Texture::kSolid : Texture::kHStripes;
      tex.a = rng.color(0.1, 0.9);
      tex.b = rng.color(0.1, 0.9);
      tex.period = rng.uniform(2.0, 8.0);
      const double w = rng.uniform(0.1, 0.4) * n;
      const double h = rng.uniform(0.1, 0.5) * n;
      const double x0 = rng.uniform(-0.1, 1.0) * n;
      const double y0 = horizon - h + rng.uniform(0.0, 0.15) * n;
      fill_rect(img, x0, y0, x0 + w, y0 + h, tex);
    } else {
      const double r = rng.uniform(0.04, 0.15) * n;
      fill_ellipse(img, rng.uniform(0.0, 1.0) * n, rng.uniform(0.2, 1.0) * n, r, r * 0.8,
                   rng.color(0.05, 0.8));
    }
  }
}

BoundingBox clipped_box(double x0, double y0, double x1, double y1, int n, int class_id) {
  x0 = std::clamp(x0, 0.0, static_cast<double>(n));
  x1 = std::clamp(x1, 0.0, static_cast<double>(n));
  y0 = std::clamp(y0, 0.0, static_cast<double>(n));
  y1 = std::clamp(y1, 0.0, static_cast<double>(n));
  return {(x0 + x1) / (2.0 * n), (y0 + y1) / (2.0 * n), (x1 - x0) / n, (y1 - y0) / n, class_id};
}

void draw_distractor(Scene& scene, Rng& rng, const SceneConfig& cfg) {
  const int n = cfg.size;
  const double w = rng.uniform(0.3, 0.55) * n;
  const double h = w * rng.uniform(0.3, 0.42);
  const double x0 = rng.uniform(-0.1, 0.9) * n - w / 2;
  const double y1 = rng.uniform(0.65, 1.0) * n;
  const double y0 = y1 - h;
  Texture body;
  body.a = rng.color(0.1, 1.0);
  fill_rect(scene.image, x0, y0 + 0.35 * h, x0 + w, y1 - 0.15 * h, body);
  fill_rect(scene.image, x0 + 0.2 * w, y0, x0 + 0.75 * w, y0 + 0.4 * h, body);
  Texture glass;
  glass.a = {0.55, 0.7, 0.8};
  fill_rect(scene.image, x0 + 0.27 * w, y0 + 0.08 * h, x0 + 0.68 * w, y0 + 0.33 * h, glass);
  const double r = 0.16 * h;
  fill_ellipse(scene.image, x0 + 0.22 * w, y1 - r, r, r, {0.05, 0.05, 0.05});
  fill_ellipse(scene.image, x0 + 0.78 * w, y1 - r, r, r, {0.05, 0.05, 0.05});
  const BoundingBox box = clipped_box(x0, y0, x0 + w, y1, n, cfg.distractor_class_id);
  if (box.w > 0.02 && box.h > 0.02) scene.boxes.push_back(box);
}

void draw_person(Scene& scene, Rng& rng, const SceneConfig& cfg) {
  const int n = cfg.size;
  const double H = rng.uniform(cfg.min_person_height, cfg.max_person_height) * n;
  const double cx = rng.uniform(0.25, 0.75) * n;
  const double bottom = std::min(n + 0.05 * H, rng.uniform(H, n + 0.05 * H));
  const double top = bottom - H;
  const double turn = rng.uniform(-cfg.max_turn_deg, cfg.max_turn_deg) * std::numbers::pi / 180.0;
  const double build = rng.uniform(0.85, 1.15) * std::cos(turn);

  const Rgb skin = [&] {
    const double tone = rng.uniform(0.25, 0.95);
    return Rgb{tone, tone * rng.uniform(0.7, 0.85), tone * rng.uniform(0.5, 0.7)};
  }();
  const Texture shirt = random_clothing(rng);
  const Texture trousers = random_clothing(rng);
  const bool long_sleeves = rng.chance(0.5);

  const double shoulder_y = top + 0.2 * H;
  const double hip_y = top + 0.56 * H;
  const double shoulder_hw = 0.17 * H * build;
  const double hip_hw = 0.14 * H * build;
  const double arm_w = 0.075 * H;
  const double arm_len = 0.36 * H;
  const double gap = 0.025 * H;

  // Head and neck.
  fill_ellipse(scene.image, cx, top + 0.095 * H, 0.085 * H, 0.095 * H, skin);
  Texture skin_tex;
  skin_tex.a = skin;
  fill_rect(scene.image, cx - 0.04 * H, top + 0.16 * H, cx + 0.04 * H, shoulder_y + 0.02 * H, skin_tex);
  const Rgb hair = rng.color(0.0, 0.45);
  fill_ellipse(scene.image, cx, top + 0.045 * H, 0.085 * H, 0.05 * H, hair);

  ClothingPolygon torso{{{cx - shoulder_hw, shoulder_y},
                         {cx + shoulder_hw, shoulder_y},
                         {cx + hip_hw, hip_y},
                         {cx - hip_hw, hip_y}},
                        "shirt"};
  ClothingPolygon pants{{{cx - hip_hw, hip_y},
                         {cx + hip_hw, hip_y},
                         {cx + hip_hw * 0.95, bottom},
                         {cx + gap, bottom},
                         {cx + gap, hip_y + 0.1 * H},
                         {cx - gap, hip_y + 0.1 * H},
                         {cx - gap, bottom},
                         {cx - hip_hw * 0.95, bottom}},
                        "pants"};
  const double lx0 = cx - shoulder_hw - arm_w;
  const double rx0 = cx + shoulder_hw;
  ClothingPolygon left_arm{{{lx0, shoulder_y},
                            {lx0 + arm_w, shoulder_y},
                            {lx0 + arm_w, shoulder_y + arm_len},
                            {lx0, shoulder_y + arm_len}},
                           "shirt"};
  ClothingPolygon right_arm{{{rx0, shoulder_y},
                             {rx0 + arm_w, shoulder_y},
                             {rx0 + arm_w, shoulder_y + arm_len},
                             {rx0, shoulder_y + arm_len}},
                            "shirt"};

  fill_polygon(scene.image, pants, trousers);
  fill_polygon(scene.image, torso, shirt);
  if (long_sleeves) {
    fill_polygon(scene.image, left_arm, shirt);
    fill_polygon(scene.image, right_arm, shirt);
  } else {
    fill_polygon(scene.image, left_arm, skin_tex);
    fill_polygon(scene.image, right_arm, skin_tex);
  }
  // Shoes.
  const Rgb shoe = rng.color(0.0, 0.3);
  Texture shoe_tex;
  shoe_tex.a = shoe;
  fill_rect(scene.image, cx - hip_hw * 0.95, bottom - 0.03 * H, cx - gap, bottom, shoe_tex);
  fill_rect(scene.image, cx + gap, bottom - 0.03 * H, cx + hip_hw * 0.95, bottom, shoe_tex);

  scene.boxes.push_back(clipped_box(lx0, top, rx0 + arm_w, bottom, n, cfg.person_class_id));
  scene.polygons.push_back(torso);
  scene.polygons.push_back(pants);
  if (long_sleeves) {
    scene.polygons.push_back(left_arm);
    scene.polygons.push_back(right_arm);
  }
}

Scene generate(const SceneConfig& cfg, std::uint64_t seed, bool force_person) {
  Rng rng(seed * 0x2545F4914F6CDD1Dull + 0x1234567ull);
  Scene scene{ImageBuffer(cfg.size, cfg.size, 3), {}, {}};
  draw_background(scene.image, rng);
  if (rng.chance(cfg.distractor_probability)) draw_distractor(scene, rng, cfg);
  const bool person = rng.chance(cfg.person_probability);
  if (force_person || person) draw_person(scene, rng, cfg);
  // Sensor grain.
  const std::uint64_t grain = rng.bits();
  for (int y = 0; y < cfg.size; ++y) {
    for (int x = 0; x < cfg.size; ++x) {
      for (int k = 0; k < 3; ++k) {
        double& v = scene.image.at(y, x, k);
        v = std::clamp(v + 0.03 * (hash_noise(grain + k, x, y) - 0.5), 0.0, 1.0);
      }
    }
  }
  return scene;
}

}  // namespace

Scene generate_scene(const SceneConfig& cfg, std::uint64_t seed) {
  return generate(cfg, seed, false);
}

Scene generate_person_scene(const SceneConfig& cfg, std::uint64_t seed) {
  return generate(cfg, seed, true);
}

ImageBuffer checkerboard(int height, int width, int square) {
  ImageBuffer out(height, width, 3);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double v = ((x / square) + (y / square)) % 2 == 0 ? 0.0 : 1.0;
      for (int k = 0; k < 3; ++k) out.at(y, x, k) = v;
    }
  }
  return out;
}

}  // namespace tessera
