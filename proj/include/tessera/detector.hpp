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

#ifndef TESSERA_DETECTOR_HPP_
#define TESSERA_DETECTOR_HPP_

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tessera/geometry.hpp"
#include "tessera/image.hpp"

namespace tessera {

struct DetectorConfig {
  std::string name = "reference";
  int person_class_id = 0;
  double detection_threshold = 0.40;
  double nms_threshold = 0.40;
  int input_size = 64;  // square network input; 0 means the adapter takes any size

  void validate() const;
};

struct Detection {
  BoundingBox box;
  int class_id = 0;
  double confidence = 0.0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

// S x S cells, A anchors per cell, each holding (tx, ty, tw, th, objectness,
// class probabilities...) after activation: tx/ty/objectness are sigmoids,
// class scores a softmax, tw/th raw log-scale offsets against the anchor.
class RawGrid {
 public:
  static constexpr int kX = 0;
  static constexpr int kY = 1;
  static constexpr int kW = 2;
  static constexpr int kH = 3;
  static constexpr int kObjectness = 4;
  static constexpr int kFirstClass = 5;

  RawGrid(int grid_size, int num_classes, std::vector<std::pair<double, double>> anchors);

  int grid_size() const noexcept { return grid_size_; }
  int num_anchors() const noexcept { return static_cast<int>(anchors_.size()); }
  int num_classes() const noexcept { return num_classes_; }
  int entry_size() const noexcept { return kFirstClass + num_classes_; }
  const std::vector<std::pair<double, double>>& anchors() const noexcept { return anchors_; }

  std::size_t offset(int gy, int gx, int anchor, int field) const noexcept {
    return ((static_cast<std::size_t>(gy) * grid_size_ + gx) * anchors_.size() + anchor) *
               entry_size() +
           field;
  }
  double& at(int gy, int gx, int anchor, int field) noexcept {
    return values_[offset(gy, gx, anchor, field)];
  }
  double at(int gy, int gx, int anchor, int field) const noexcept {
    return values_[offset(gy, gx, anchor, field)];
  }
  double objectness(int gy, int gx, int anchor) const noexcept {
    return at(gy, gx, anchor, kObjectness);
  }
  double class_probability(int gy, int gx, int anchor, int cls) const noexcept {
    return at(gy, gx, anchor, kFirstClass + cls);
  }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  // A grid of the same layout with every value zero (used for gradients).
  RawGrid zeros_like() const;

  friend bool operator==(const RawGrid&, const RawGrid&) = default;

 private:
  int grid_size_;
  int num_classes_;
  std::vector<std::pair<double, double>> anchors_;
  std::vector<double> values_;
};

// Class-aware greedy NMS: highest confidence first, suppressing same-class
// boxes with IoU above the threshold. Ties are ordered on box geometry so the
// result depends only on the input set, not its order.
std::vector<Detection> non_max_suppression(std::vector<Detection> detections,
                                           double iou_threshold);

// confidence = objectness * class probability for every class; candidates
// below detection_threshold are dropped before NMS.
std::vector<Detection> decode(const RawGrid& grid, const DetectorConfig& cfg);

// Max over person-class detections, 0.0 when there are none.
double max_person_confidence(std::span<const Detection> detections, int person_class_id);
std::size_t count_class(std::span<const Detection> detections, int class_id);

// Every detector the evaluator can score against.
class Detector {
 public:
  virtual ~Detector() = default;

  virtual std::string name() const = 0;
  // Takes an image already sized for the detector (see DetectorConfig::input_size).
  virtual std::vector<Detection> detect(const ImageBuffer& image,
                                        const DetectorConfig& cfg) const = 0;
  virtual bool has_gradients() const { return false; }
};

// Opaque per-call activation record needed for a backward pass.
class ForwardTape {
 public:
  virtual ~ForwardTape() = default;
};

struct TracedForward {
  RawGrid grid;
  std::unique_ptr<ForwardTape> tape;
};

// A detector that exposes its raw grid and input gradients; trainers require one.
class GradientDetector : public Detector {
 public:
  virtual RawGrid forward(const ImageBuffer& image, const DetectorConfig& cfg) const = 0;
  virtual TracedForward forward_traced(const ImageBuffer& image,
                                       const DetectorConfig& cfg) const = 0;
  // grad_grid holds dL/d(activated grid values); returns dL/d(input pixels).
  virtual ImageBuffer backward(const TracedForward& traced, const RawGrid& grad_grid) const = 0;

  std::vector<Detection> detect(const ImageBuffer& image,
                                const DetectorConfig& cfg) const override {
    return decode(forward(image, cfg), cfg);
  }
  bool has_gradients() const override { return true; }
};

// Test stub: reports one centered person at a fixed confidence (or nothing
// when the confidence is zero).
class ConstantDetector final : public Detector {
 public:
  ConstantDetector(std::string name, double confidence)
      : name_(std::move(name)), confidence_(confidence) {}

  std::string name() const override { return name_; }
  std::vector<Detection> detect(const ImageBuffer& image,
                                const DetectorConfig& cfg) const override;

 private:
  std::string name_;
  double confidence_;
};

// Resizes (bilinear) to cfg.input_size when that is set and differs.
ImageBuffer fit_to_input(const ImageBuffer& image, const DetectorConfig& cfg);

}  // namespace tessera

#endif  // TESSERA_DETECTOR_HPP_
