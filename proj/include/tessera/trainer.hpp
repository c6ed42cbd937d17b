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

#ifndef TESSERA_TRAINER_HPP_
#define TESSERA_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tessera/detector.hpp"
#include "tessera/image.hpp"
#include "tessera/ingest.hpp"
#include "tessera/losses.hpp"
#include "tessera/placement.hpp"
#include "tessera/transforms.hpp"

namespace tessera {

enum class AttackMode { kPatch, kPattern };
enum class OptimizerKind { kSgd, kAdam };

AttackMode parse_attack_mode(std::string_view name);
std::string_view attack_mode_name(AttackMode mode);
OptimizerKind parse_optimizer(std::string_view name);
std::string_view optimizer_name(OptimizerKind kind);

struct TrainConfig {
  AttackMode mode = AttackMode::kPattern;
  // Pattern mode: element side as a fraction of the mean person-box side.
  double element_fraction = 0.05;
  int min_element_side = 8;
  // Patch mode: pasted size relative to each person box.
  double scale_fraction = 0.30;
  ScaleSemantics scale_semantics = ScaleSemantics::kArea;
  int steps = 500;
  double step_size = 0.05;
  // The step size is multiplied by decay_factor once decay_at * steps steps
  // have been taken.
  double decay_at = 0.8;
  double decay_factor = 0.1;
  int batch = 8;
  OptimizerKind optimizer = OptimizerKind::kSgd;
  EotConfig eot;
  LossWeights weights;
  DetectionLossOptions detection_loss;
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& cfg);
// Strict: unknown keys are a ConfigError; missing keys keep their defaults.
TrainConfig train_config_from_json(const nlohmann::json& doc);
std::string config_hash(const nlohmann::json& doc);

// Everything needed to rerun a training job and the trace it produced.
struct RunManifest {
  nlohmann::json config;
  std::string code_version;
  std::string codec_version;
  std::string detector_name;
  std::uint64_t seed = 0;
  int element_side = 0;
  double mean_box_side = 0.0;
  std::vector<double> loss_trace;  // pre-step combined loss, averaged over the batch
  std::vector<double> detection_trace;  // pre-step mean detection loss
  ImageBuffer final_element;

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& doc);
};

struct TrainingResult {
  PatchElement element;
  RunManifest manifest;
};

std::string code_version();

// Mean over all person boxes of the denormalized box side sqrt(w * h).
double mean_bbox_side(std::span<const DatasetSample> samples, int person_class_id);

// round(fraction * mean_side), at least min_side.
int element_side_for(double fraction, double mean_side, int min_side);

// Initial element: independent uniform draws in [0.3, 0.7].
PatchElement initial_element(int side, std::uint64_t seed);

using StepCallback = std::function<void(int step, double loss)>;

// Tiled pattern: each step composites the element through every sample's
// clothing mask, augments, runs the detector and pulls the gradient of every
// tile copy back into the single element.
TrainingResult train_pattern(std::span<const DatasetSample> samples, const Detector& detector,
                             const DetectorConfig& detector_cfg, const TrainConfig& cfg,
                             const PrintableSet& printable, const StepCallback& on_step = {});

// Single patch pasted over each person box at cfg.scale_fraction.
TrainingResult train_patch(std::span<const DatasetSample> samples, const Detector& detector,
                           const DetectorConfig& detector_cfg, const TrainConfig& cfg,
                           const PrintableSet& printable, const StepCallback& on_step = {});

TrainingResult train(std::span<const DatasetSample> samples, const Detector& detector,
                     const DetectorConfig& detector_cfg, const TrainConfig& cfg,
                     const PrintableSet& printable, const StepCallback& on_step = {});

struct SweepRow {
  double fraction = 0.0;
  int element_side = 0;
  double mean_confidence = 0.0;
};

struct SweepResult {
  double best_fraction = 0.0;
  std::vector<SweepRow> table;
};

// Applies the element rescaled to each candidate size through the clothing
// masks of the training samples and records the mean max-person confidence.
// The lowest mean wins; ties go to the smaller fraction.
SweepResult sweep_element_size(const PatchElement& element, std::span<const DatasetSample> samples,
                               const Detector& detector, const DetectorConfig& detector_cfg,
                               std::span<const double> candidate_fractions, int min_element_side = 2);

// Union of a sample's rasterized clothing polygons.
BooleanMask clothing_mask(const DatasetSample& sample);

}  // namespace tessera

#endif  // TESSERA_TRAINER_HPP_
