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

#include "tessera/detector_training.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace tessera {
namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Moves box centers the way apply_eot moves content. Extents only follow the
// scale; the small rotations used in training barely change them.
void transform_boxes(std::vector<BoundingBox>& boxes, const TransformParams& params) {
  const double rad = params.rotation_deg * std::numbers::pi / 180.0;
  const double c = std::cos(rad);
  const double s = std::sin(rad);
  std::vector<BoundingBox> kept;
  for (BoundingBox b : boxes) {
    const double dx = params.scale * (b.cx - 0.5);
    const double dy = params.scale * (b.cy - 0.5);
    b.cx = 0.5 + c * dx + s * dy;
    b.cy = 0.5 - s * dx + c * dy;
    b.w *= params.scale;
    b.h *= params.scale;
    if (b.cx >= 0.0 && b.cx < 1.0 && b.cy >= 0.0 && b.cy < 1.0) kept.push_back(b);
  }
  boxes = std::move(kept);
}

// Accumulates dLoss/dlogits for one scene; returns the scene's loss.
double yolo_loss(const RawGrid& grid, std::span<const double> logits, const Scene& scene,
                 double noobj_weight, double scale, std::vector<double>& grad) {
  const int s = grid.grid_size();
  const int anchors = grid.num_anchors();
  std::vector<int> responsible(static_cast<std::size_t>(s) * s * anchors, -1);
  for (std::size_t b = 0; b < scene.boxes.size(); ++b) {
    const auto& box = scene.boxes[b];
    const int gx = std::min(s - 1, static_cast<int>(box.cx * s));
    const int gy = std::min(s - 1, static_cast<int>(box.cy * s));
    int best = 0;
    double best_iou = -1.0;
    for (int a = 0; a < anchors; ++a) {
      const auto [aw, ah] = grid.anchors()[a];
      const double iou = intersection_over_union({0.5, 0.5, box.w, box.h, 0}, {0.5, 0.5, aw, ah, 0});
      if (iou > best_iou) {
        best_iou = iou;
        best = a;
      }
    }
    responsible[(static_cast<std::size_t>(gy) * s + gx) * anchors + best] = static_cast<int>(b);
  }

  double loss = 0.0;
  for (int gy = 0; gy < s; ++gy) {
    for (int gx = 0; gx < s; ++gx) {
      for (int a = 0; a < anchors; ++a) {
        const int owner = responsible[(static_cast<std::size_t>(gy) * s + gx) * anchors + a];
        const auto idx = [&](int k) { return grid.offset(gy, gx, a, k); };
        const double obj = grid.objectness(gy, gx, a);
        if (owner < 0) {
          loss -= noobj_weight * std::log(std::max(1e-12, 1.0 - obj));
          grad[idx(RawGrid::kObjectness)] += scale * noobj_weight * obj;
          continue;
        }
        const auto& box = scene.boxes[owner];
        loss -= std::log(std::max(1e-12, obj));
        grad[idx(RawGrid::kObjectness)] += scale * (obj - 1.0);

        const double tx = box.cx * s - gx;
        const double ty = box.cy * s - gy;
        const double px = sigmoid(logits[idx(RawGrid::kX)]);
        const double py = sigmoid(logits[idx(RawGrid::kY)]);
        loss += (px - tx) * (px - tx) + (py - ty) * (py - ty);
        grad[idx(RawGrid::kX)] += scale * (px - tx);
        grad[idx(RawGrid::kY)] += scale * (py - ty);

        const auto [aw, ah] = grid.anchors()[a];
        const double tw = std::log(box.w / aw);
        const double th = std::log(box.h / ah);
        const double dw = logits[idx(RawGrid::kW)] - tw;
        const double dh = logits[idx(RawGrid::kH)] - th;
        loss += 0.5 * (dw * dw + dh * dh);
        grad[idx(RawGrid::kW)] += scale * dw;
        grad[idx(RawGrid::kH)] += scale * dh;

        for (int c = 0; c < grid.num_classes(); ++c) {
          const double p = grid.class_probability(gy, gx, a, c);
          const double target = c == box.class_id ? 1.0 : 0.0;
          if (target > 0.0) loss -= std::log(std::max(1e-12, p));
          grad[idx(RawGrid::kFirstClass + c)] += scale * (p - target);
        }
      }
    }
  }
  return loss;
}

}  // namespace

ReferenceDetector train_reference_detector(const ReferenceArchitecture& arch,
                                           const DetectorTrainingConfig& cfg, std::string name,
                                           const std::function<void(int, double)>& progress) {
  ReferenceDetector detector(arch, cfg.seed, std::move(name));
  DetectorConfig run_cfg;
  run_cfg.input_size = arch.input_size;
  SceneConfig scenes = cfg.scenes;
  scenes.size = arch.input_size;

  auto params = detector.parameters();
  const std::size_t n = params.size();
  std::vector<double> m(n, 0.0), v(n, 0.0), grad(n);
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;

  std::uint64_t scene_seed = cfg.seed * 1000003ull;
  std::mt19937_64 augment_rng(cfg.seed ^ 0xA5A5A5A5ull);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int step = 0; step < cfg.steps; ++step) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double loss = 0.0;
    for (int b = 0; b < cfg.batch; ++b) {
      Scene scene = generate_scene(scenes, scene_seed);
      if (unit(augment_rng) < cfg.eot_probability) {
        const TransformParams params = sample_eot(cfg.eot, scene_seed);
        scene.image = apply_eot(scene.image, params);
        transform_boxes(scene.boxes, params);
      }
      ++scene_seed;
      if (unit(augment_rng) < cfg.resample_probability) {
        DefenseSpec down;
        down.kind = DefenseKind::kResize;
        down.parameter = unit(augment_rng) < 0.5 ? 0.5 : 0.25;
        scene.image = fit_to_input(apply_defense(scene.image, down), run_cfg);
      }
      TracedForward traced = detector.forward_traced(scene.image, run_cfg);
      const auto logits = ReferenceDetector::head_logits(traced);
      std::vector<double> logit_grad(logits.size(), 0.0);
      loss += yolo_loss(traced.grid, logits, scene, cfg.noobj_weight, 1.0 / cfg.batch, logit_grad);
      detector.backward_parameters_from_logits(traced, logit_grad, grad);
    }
    loss /= cfg.batch;
    const double progress_frac = static_cast<double>(step) / std::max(1, cfg.steps);
    const double lr = cfg.learning_rate * 0.5 * (1.0 + std::cos(std::numbers::pi * progress_frac));
    const double bc1 = 1.0 - std::pow(kBeta1, step + 1);
    const double bc2 = 1.0 - std::pow(kBeta2, step + 1);
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = kBeta1 * m[i] + (1 - kBeta1) * grad[i];
      v[i] = kBeta2 * v[i] + (1 - kBeta2) * grad[i] * grad[i];
      params[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + kEps);
    }
    if (progress) progress(step, loss);
  }
  return detector;
}

RecallReport measure_person_recall(const Detector& detector, const DetectorConfig& cfg,
                                   const SceneConfig& scenes, std::uint64_t first_seed,
                                   int count) {
  RecallReport report;
  for (int i = 0; i < count; ++i) {
    const Scene scene = generate_person_scene(scenes, first_seed + static_cast<std::uint64_t>(i));
    const BoundingBox* truth = nullptr;
    for (const auto& b : scene.boxes) {
      if (b.class_id == cfg.person_class_id) truth = &b;
    }
    if (!truth) continue;
    ++report.scenes;
    const auto detections = detector.detect(fit_to_input(scene.image, cfg), cfg);
    const bool hit = std::any_of(detections.begin(), detections.end(), [&](const Detection& d) {
      return d.class_id == cfg.person_class_id && intersection_over_union(d.box, *truth) >= 0.5;
    });
    if (hit) ++report.detected;
  }
  return report;
}

}  // namespace tessera
