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

#ifndef TESSERA_DETECTOR_TRAINING_HPP_
#define TESSERA_DETECTOR_TRAINING_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tessera/detector.hpp"
#include "tessera/reference_detector.hpp"
#include "tessera/synthetic.hpp"
#include "tessera/transforms.hpp"

namespace tessera {

struct DetectorTrainingConfig {
  int steps = 2500;
  int batch = 8;
  double learning_rate = 3e-3;
  double noobj_weight = 0.5;
  std::uint64_t seed = 7;
  // Fraction of training scenes that are downscaled by 1/2 or 1/4 and
  // brought back to input size, so that low-resolution inputs still detect.
  double resample_probability = 0.35;
  // Fraction of training scenes passed through a random EOT draw, with the
  // box labels moved to match.
  double eot_probability = 0.5;
  EotConfig eot;
  SceneConfig scenes;
};

// YOLO-style fit on freshly generated synthetic scenes (Adam, cosine decay).
// Single-threaded and deterministic in the config.
ReferenceDetector train_reference_detector(
    const ReferenceArchitecture& arch, const DetectorTrainingConfig& cfg, std::string name,
    const std::function<void(int step, double loss)>& progress = {});

struct RecallReport {
  int scenes = 0;
  int detected = 0;
  double recall() const { return scenes ? static_cast<double>(detected) / scenes : 0.0; }
};

// A person scene counts as detected when some person detection overlaps the
// labeled box with IoU >= 0.5.
RecallReport measure_person_recall(const Detector& detector, const DetectorConfig& cfg,
                                   const SceneConfig& scenes, std::uint64_t first_seed,
                                   int count);

}  // namespace tessera

#endif  // TESSERA_DETECTOR_TRAINING_HPP_
