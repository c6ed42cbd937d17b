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

#include "tessera/detector.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "tessera/error.hpp"
#include "tessera/resample.hpp"

namespace tessera {

void DetectorConfig::validate() const {
  if (!(detection_threshold > 0.0 && detection_threshold < 1.0)) {
    fail(ErrorCode::kInvalidArgument, "detection_threshold must be in (0,1)");
  }
  if (!(nms_threshold > 0.0 && nms_threshold < 1.0)) {
    fail(ErrorCode::kInvalidArgument, "nms_threshold must be in (0,1)");
  }
  if (input_size < 0) fail(ErrorCode::kInvalidArgument, "input_size must be >= 0");
}

RawGrid::RawGrid(int grid_size, int num_classes,
                 std::vector<std::pair<double, double>> anchors)
    : grid_size_(grid_size), num_classes_(num_classes), anchors_(std::move(anchors)) {
  if (grid_size < 1 || num_classes < 1 || anchors_.empty()) {
    fail(ErrorCode::kInvalidArgument, "raw grid needs a positive size, classes and anchors");
  }
  values_.assign(static_cast<std::size_t>(grid_size) * grid_size * anchors_.size() *
                     entry_size(),
                 0.0);
}

RawGrid RawGrid::zeros_like() const { return RawGrid(grid_size_, num_classes_, anchors_); }

namespace {

auto ordering_key(const Detection& d) {
  return std::make_tuple(-d.confidence, d.class_id, d.box.cx, d.box.cy, d.box.w, d.box.h);
}

}  // namespace

std::vector<Detection> non_max_suppression(std::vector<Detection> detections,
                                           double iou_threshold) {
  std::sort(detections.begin(), detections.end(),
            [](const Detection& a, const Detection& b) { return ordering_key(a) < ordering_key(b); });
  std::vector<Detection> kept;
  for (const auto& candidate : detections) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const Detection& k) {
      return k.class_id == candidate.class_id &&
             intersection_over_union(k.box, candidate.box) > iou_threshold;
    });
    if (!suppressed) kept.push_back(candidate);
  }
  return kept;
}

std::vector<Detection> decode(const RawGrid& grid, const DetectorConfig& cfg) {
  const int s = grid.grid_size();
  std::vector<Detection> candidates;
  for (int gy = 0; gy < s; ++gy) {
    for (int gx = 0; gx < s; ++gx) {
      for (int a = 0; a < grid.num_anchors(); ++a) {
        const double obj = grid.objectness(gy, gx, a);
        if (obj < cfg.detection_threshold) continue;
        const auto [anchor_w, anchor_h] = grid.anchors()[a];
        BoundingBox box;
        box.cx = std::clamp((gx + grid.at(gy, gx, a, RawGrid::kX)) / s, 0.0, 1.0);
        box.cy = std::clamp((gy + grid.at(gy, gx, a, RawGrid::kY)) / s, 0.0, 1.0);
        box.w = std::clamp(anchor_w * std::exp(grid.at(gy, gx, a, RawGrid::kW)), 1e-6, 1.0);
        box.h = std::clamp(anchor_h * std::exp(grid.at(gy, gx, a, RawGrid::kH)), 1e-6, 1.0);
        for (int c = 0; c < grid.num_classes(); ++c) {
          const double confidence = obj * grid.class_probability(gy, gx, a, c);
          if (confidence < cfg.detection_threshold) continue;
          box.class_id = c;
          candidates.push_back({box, c, confidence});
        }
      }
    }
  }
  return non_max_suppression(std::move(candidates), cfg.nms_threshold);
}

double max_person_confidence(std::span<const Detection> detections, int person_class_id) {
  double best = 0.0;
  for (const auto& d : detections) {
    if (d.class_id == person_class_id) best = std::max(best, d.confidence);
  }
  return best;
}

std::size_t count_class(std::span<const Detection> detections, int class_id) {
  return static_cast<std::size_t>(std::count_if(
      detections.begin(), detections.end(),
      [class_id](const Detection& d) { return d.class_id == class_id; }));
}

std::vector<Detection> ConstantDetector::detect(const ImageBuffer& /*image*/,
                                                const DetectorConfig& cfg) const {
  if (confidence_ <= 0.0 || confidence_ < cfg.detection_threshold) return {};
  return {Detection{BoundingBox{0.5, 0.5, 0.4, 0.8, cfg.person_class_id}, cfg.person_class_id,
                    confidence_}};
}

ImageBuffer fit_to_input(const ImageBuffer& image, const DetectorConfig& cfg) {
  if (cfg.input_size <= 0) return image;
  return resize(image, cfg.input_size, cfg.input_size, ResizeKernel::kBilinear);
}

}  // namespace tessera
