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

#include "tessera/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <random>

#include <fmt/format.h>

#include "tessera/error.hpp"
#include "tessera/image_io.hpp"
#include "tessera/json_util.hpp"
#include "tessera/resample.hpp"

#ifndef TESSERA_VERSION
#define TESSERA_VERSION "0.0.0"
#endif

namespace tessera {

AttackMode parse_attack_mode(std::string_view name) {
  if (name == "pattern") return AttackMode::kPattern;
  if (name == "patch") return AttackMode::kPatch;
  fail(ErrorCode::kConfigError, "unknown attack mode '" + std::string(name) + "'");
}

std::string_view attack_mode_name(AttackMode mode) {
  return mode == AttackMode::kPattern ? "pattern" : "patch";
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adam") return OptimizerKind::kAdam;
  fail(ErrorCode::kConfigError, "unknown optimizer '" + std::string(name) + "'");
}

std::string_view optimizer_name(OptimizerKind kind) {
  return kind == OptimizerKind::kSgd ? "sgd" : "adam";
}

std::string code_version() { return std::string("tessera ") + TESSERA_VERSION; }

void TrainConfig::validate() const {
  if (steps < 0) fail(ErrorCode::kConfigError, "steps must be >= 0");
  if (!(element_fraction > 0.0 && element_fraction <= 1.0)) {
    fail(ErrorCode::kConfigError, "element_fraction must be in (0,1]");
  }
  if (!(scale_fraction > 0.0 && scale_fraction <= 1.0)) {
    fail(ErrorCode::kConfigError, "scale_fraction must be in (0,1]");
  }
  if (batch < 1) fail(ErrorCode::kConfigError, "batch must be >= 1");
  if (min_element_side < 2) fail(ErrorCode::kConfigError, "min_element_side must be >= 2");
  if (!(step_size > 0.0)) fail(ErrorCode::kConfigError, "step_size must be > 0");
  if (!(decay_at >= 0.0 && decay_at <= 1.0) || !(decay_factor > 0.0)) {
    fail(ErrorCode::kConfigError, "decay_at must be in [0,1] and decay_factor > 0");
  }
  eot.validate();
  weights.validate();
}

nlohmann::json to_json(const TrainConfig& cfg) {
  return {
      {"mode", attack_mode_name(cfg.mode)},
      {"element_fraction", cfg.element_fraction},
      {"min_element_side", cfg.min_element_side},
      {"scale_fraction", cfg.scale_fraction},
      {"scale_semantics", scale_semantics_name(cfg.scale_semantics)},
      {"steps", cfg.steps},
      {"step_size", cfg.step_size},
      {"decay_at", cfg.decay_at},
      {"decay_factor", cfg.decay_factor},
      {"batch", cfg.batch},
      {"optimizer", optimizer_name(cfg.optimizer)},
      {"eot",
       {{"rotation_deg", cfg.eot.rotation_deg},
        {"scale_min", cfg.eot.scale_min},
        {"scale_max", cfg.eot.scale_max},
        {"noise_std", cfg.eot.noise_std},
        {"brightness_min", cfg.eot.brightness_min},
        {"brightness_max", cfg.eot.brightness_max},
        {"contrast_min", cfg.eot.contrast_min},
        {"contrast_max", cfg.eot.contrast_max},
        {"seed", cfg.eot.seed}}},
      {"weights",
       {{"detection", cfg.weights.detection}, {"tv", cfg.weights.tv}, {"nps", cfg.weights.nps}}},
      {"detection_loss",
       {{"smooth", cfg.detection_loss.smooth},
        {"temperature", cfg.detection_loss.temperature}}},
      {"seed", cfg.seed},
  };
}

TrainConfig train_config_from_json(const nlohmann::json& doc) {
  constexpr std::string_view kCtx = "train";
  require_known_keys(doc,
                     {"mode", "element_fraction", "min_element_side", "scale_fraction",
                      "scale_semantics", "steps", "step_size", "decay_at", "decay_factor",
                      "batch", "optimizer", "eot", "weights", "detection_loss", "seed"},
                     kCtx);
  TrainConfig cfg;
  std::string mode(attack_mode_name(cfg.mode));
  read_optional(doc, "mode", mode, kCtx);
  cfg.mode = parse_attack_mode(mode);
  read_optional(doc, "element_fraction", cfg.element_fraction, kCtx);
  read_optional(doc, "min_element_side", cfg.min_element_side, kCtx);
  read_optional(doc, "scale_fraction", cfg.scale_fraction, kCtx);
  std::string semantics(scale_semantics_name(cfg.scale_semantics));
  read_optional(doc, "scale_semantics", semantics, kCtx);
  try {
    cfg.scale_semantics = parse_scale_semantics(semantics);
  } catch (const Error& e) {
    fail(ErrorCode::kConfigError, e.what());
  }
  read_optional(doc, "steps", cfg.steps, kCtx);
  read_optional(doc, "step_size", cfg.step_size, kCtx);
  read_optional(doc, "decay_at", cfg.decay_at, kCtx);
  read_optional(doc, "decay_factor", cfg.decay_factor, kCtx);
  read_optional(doc, "batch", cfg.batch, kCtx);
  std::string optimizer(optimizer_name(cfg.optimizer));
  read_optional(doc, "optimizer", optimizer, kCtx);
  cfg.optimizer = parse_optimizer(optimizer);
  read_optional(doc, "seed", cfg.seed, kCtx);
  if (const auto it = doc.find("eot"); it != doc.end()) {
    constexpr std::string_view kEot = "train.eot";
    require_known_keys(*it,
                       {"rotation_deg", "scale_min", "scale_max", "noise_std", "brightness_min",
                        "brightness_max", "contrast_min", "contrast_max", "seed"},
                       kEot);
    read_optional(*it, "rotation_deg", cfg.eot.rotation_deg, kEot);
    read_optional(*it, "scale_min", cfg.eot.scale_min, kEot);
    read_optional(*it, "scale_max", cfg.eot.scale_max, kEot);
    read_optional(*it, "noise_std", cfg.eot.noise_std, kEot);
    read_optional(*it, "brightness_min", cfg.eot.brightness_min, kEot);
    read_optional(*it, "brightness_max", cfg.eot.brightness_max, kEot);
    read_optional(*it, "contrast_min", cfg.eot.contrast_min, kEot);
    read_optional(*it, "contrast_max", cfg.eot.contrast_max, kEot);
    read_optional(*it, "seed", cfg.eot.seed, kEot);
  }
  if (const auto it = doc.find("weights"); it != doc.end()) {
    constexpr std::string_view kW = "train.weights";
    require_known_keys(*it, {"detection", "tv", "nps"}, kW);
    read_optional(*it, "detection", cfg.weights.detection, kW);
    read_optional(*it, "tv", cfg.weights.tv, kW);
    read_optional(*it, "nps", cfg.weights.nps, kW);
  }
  if (const auto it = doc.find("detection_loss"); it != doc.end()) {
    constexpr std::string_view kD = "train.detection_loss";
    require_known_keys(*it, {"smooth", "temperature"}, kD);
    read_optional(*it, "smooth", cfg.detection_loss.smooth, kD);
    read_optional(*it, "temperature", cfg.detection_loss.temperature, kD);
  }
  try {
    cfg.validate();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfigError) throw;
    fail(ErrorCode::kConfigError, e.what());
  }
  return cfg;
}

std::string config_hash(const nlohmann::json& doc) {
  // FNV-1a over the canonical (sorted-key) dump.
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char ch : doc.dump()) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return fmt::format("{:016x}", h);
}

nlohmann::json RunManifest::to_json() const {
  return {{"schema", 1},
          {"code_version", code_version},
          {"codec_version", codec_version},
          {"detector", detector_name},
          {"config", config},
          {"config_hash", config_hash(config)},
          {"seed", seed},
          {"element_side", element_side},
          {"mean_box_side", mean_box_side},
          {"loss_trace", loss_trace},
          {"detection_trace", detection_trace},
          {"final_element",
           {{"height", final_element.height()},
            {"width", final_element.width()},
            {"channels", final_element.channels()},
            {"data", std::vector<double>(final_element.data().begin(), final_element.data().end())}}}};
}

RunManifest RunManifest::from_json(const nlohmann::json& doc) {
  try {
    const auto& fe = doc.at("final_element");
    RunManifest m{doc.at("config"),
                  doc.at("code_version").get<std::string>(),
                  doc.value("codec_version", std::string()),
                  doc.value("detector", std::string()),
                  doc.at("seed").get<std::uint64_t>(),
                  doc.at("element_side").get<int>(),
                  doc.value("mean_box_side", 0.0),
                  doc.at("loss_trace").get<std::vector<double>>(),
                  doc.value("detection_trace", std::vector<double>{}),
                  ImageBuffer(fe.at("height").get<int>(), fe.at("width").get<int>(),
                              fe.at("channels").get<int>(),
                              fe.at("data").get<std::vector<double>>())};
    return m;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParseError, std::string("manifest: ") + e.what());
  }
}

double mean_bbox_side(std::span<const DatasetSample> samples, int person_class_id) {
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& s : samples) {
    for (const auto& b : s.boxes) {
      if (b.class_id != person_class_id) continue;
      total += std::sqrt(b.w * s.image.width() * b.h * s.image.height());
      ++count;
    }
  }
  if (count == 0) fail(ErrorCode::kNoBoxes, "no person boxes in the training samples");
  return total / static_cast<double>(count);
}

int element_side_for(double fraction, double mean_side, int min_side) {
  return std::max(min_side, static_cast<int>(std::lround(fraction * mean_side)));
}

PatchElement initial_element(int side, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x5DEECE66Dull);
  ImageBuffer pixels(side, side, 3);
  for (double& v : pixels.data()) {
    v = 0.3 + 0.4 * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
  }
  return PatchElement(std::move(pixels));
}

BooleanMask clothing_mask(const DatasetSample& sample) {
  std::vector<BooleanMask> masks;
  masks.reserve(sample.polygons.size());
  for (const auto& poly : sample.polygons) {
    masks.push_back(rasterize_polygon(poly, sample.image.height(), sample.image.width()));
  }
  return union_masks(masks, sample.image.height(), sample.image.width());
}

namespace {

// How the element reaches a training image, and how gradients come back.
class Compositor {
 public:
  virtual ~Compositor() = default;
  virtual ImageBuffer apply(std::size_t sample, const PatchElement& element) const = 0;
  virtual ImageBuffer backward(std::size_t sample, const ImageBuffer& grad_image) const = 0;
};

class PatternCompositor final : public Compositor {
 public:
  PatternCompositor(std::span<const DatasetSample> samples, int side) : samples_(samples), side_(side) {
    for (const auto& s : samples) masks_.push_back(clothing_mask(s));
  }
  ImageBuffer apply(std::size_t i, const PatchElement& element) const override {
    return apply_masked_pattern(samples_[i].image, element, masks_[i]);
  }
  ImageBuffer backward(std::size_t i, const ImageBuffer& grad_image) const override {
    return masked_pattern_backward(grad_image, masks_[i], side_);
  }

 private:
  std::span<const DatasetSample> samples_;
  int side_;
  std::vector<BooleanMask> masks_;
};

class PatchCompositor final : public Compositor {
 public:
  PatchCompositor(std::span<const DatasetSample> samples, int side, int person_class_id,
                  const PlacementConfig& placement)
      : samples_(samples), side_(side) {
    for (const auto& s : samples) {
      std::vector<PatchPaste> pastes;
      for (const auto& b : s.boxes) {
        if (b.class_id != person_class_id) continue;
        pastes.emplace_back(side, b, s.image.height(), s.image.width(), placement);
      }
      pastes_.push_back(std::move(pastes));
    }
  }
  ImageBuffer apply(std::size_t i, const PatchElement& element) const override {
    ImageBuffer out = samples_[i].image;
    for (const auto& paste : pastes_[i]) out = paste.apply(out, element);
    return out;
  }
  ImageBuffer backward(std::size_t i, const ImageBuffer& grad_image) const override {
    // Later pastes overwrite earlier ones, so walk them in reverse and zero
    // the gradient under each paste before visiting the one beneath it.
    ImageBuffer grad_patch(side_, side_, grad_image.channels());
    ImageBuffer g = grad_image;
    const auto& pastes = pastes_[i];
    for (auto it = pastes.rbegin(); it != pastes.rend(); ++it) {
      const ImageBuffer contribution = it->backward(g);
      auto dst = grad_patch.data();
      const auto src = contribution.data();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
      for (int py = 0; py < it->paste_side(); ++py) {
        const int y = it->top() + py;
        if (y < 0 || y >= g.height()) continue;
        for (int px = 0; px < it->paste_side(); ++px) {
          const int x = it->left() + px;
          if (x < 0 || x >= g.width()) continue;
          for (int c = 0; c < g.channels(); ++c) g.at(y, x, c) = 0.0;
        }
      }
    }
    return grad_patch;
  }

 private:
  std::span<const DatasetSample> samples_;
  int side_;
  std::vector<std::vector<PatchPaste>> pastes_;
};

const GradientDetector& require_gradients(const Detector& detector) {
  const auto* grad = dynamic_cast<const GradientDetector*>(&detector);
  if (!grad) {
    fail(ErrorCode::kNoGradient, "detector '" + detector.name() + "' does not provide gradients");
  }
  return *grad;
}

TrainingResult optimize(const GradientDetector& detector,
                        const DetectorConfig& detector_cfg, const TrainConfig& cfg,
                        const PrintableSet& printable, const Compositor& compositor,
                        std::vector<std::size_t> usable, int side, double mean_side,
                        const StepCallback& on_step) {
  PatchElement element = initial_element(side, cfg.seed);
  RunManifest manifest{to_json(cfg), code_version(), codec_version(), detector.name(),
                       cfg.seed, side, mean_side, {}, {}, element.pixels()};

  std::mt19937_64 rng(cfg.seed);
  const std::size_t n_values = element.pixels().size();
  std::vector<double> adam_m(n_values, 0.0), adam_v(n_values, 0.0);
  const int decay_step = static_cast<int>(std::ceil(cfg.decay_at * cfg.steps));
  const int input_size = detector_cfg.input_size;

  for (int step = 0; step < cfg.steps; ++step) {
    ImageBuffer grad(side, side, element.channels());
    double detection_sum = 0.0;
    for (int b = 0; b < cfg.batch; ++b) {
      const std::size_t idx = usable[rng() % usable.size()];
      const ImageBuffer composite = compositor.apply(idx, element);
      const TransformParams params =
          sample_eot(cfg.eot, static_cast<std::uint64_t>(step) * cfg.batch + b);
      const EotPass augmented = apply_eot_traced(composite, params);
      std::optional<SamplingPlan> fit;
      const ImageBuffer* input = &augmented.output();
      ImageBuffer resized = augmented.output();
      if (input_size > 0 &&
          (composite.height() != input_size || composite.width() != input_size)) {
        fit.emplace(make_resize_plan(composite.height(), composite.width(), input_size, input_size,
                                     ResizeKernel::kBilinear));
        resized = fit->apply(augmented.output());
        input = &resized;
      }
      const TracedForward traced = detector.forward_traced(*input, detector_cfg);
      GridLoss det = detection_loss_with_gradient(traced.grid, detector_cfg.person_class_id,
                                                  cfg.detection_loss);
      detection_sum += det.value;
      const double scale = cfg.weights.detection / cfg.batch;
      for (double& g : det.gradient.values()) g *= scale;
      ImageBuffer g_img = detector.backward(traced, det.gradient);
      if (fit) g_img = fit->apply_transpose(g_img);
      g_img = augmented.backward(g_img);
      const ImageBuffer g_elem = compositor.backward(idx, g_img);
      auto dst = grad.data();
      const auto src = g_elem.data();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
    const ElementLoss tv = total_variation_with_gradient(element);
    const ElementLoss nps = non_printability_with_gradient(element, printable);
    const double mean_detection = detection_sum / cfg.batch;
    const double loss =
        cfg.weights.detection * mean_detection + cfg.weights.tv * tv.value + cfg.weights.nps * nps.value;
    manifest.loss_trace.push_back(loss);
    manifest.detection_trace.push_back(mean_detection);
    if (on_step) on_step(step, loss);

    auto g = grad.data();
    const auto tg = tv.gradient.data();
    const auto ng = nps.gradient.data();
    for (std::size_t k = 0; k < g.size(); ++k) g[k] += cfg.weights.tv * tg[k] + cfg.weights.nps * ng[k];

    const double lr = cfg.step_size * (step >= decay_step ? cfg.decay_factor : 1.0);
    auto p = element.pixels().data();
    if (cfg.optimizer == OptimizerKind::kSgd) {
      for (std::size_t k = 0; k < p.size(); ++k) p[k] -= lr * g[k];
    } else {
      constexpr double kBeta1 = 0.9;
      constexpr double kBeta2 = 0.999;
      const double bc1 = 1.0 - std::pow(kBeta1, step + 1);
      const double bc2 = 1.0 - std::pow(kBeta2, step + 1);
      for (std::size_t k = 0; k < p.size(); ++k) {
        adam_m[k] = kBeta1 * adam_m[k] + (1 - kBeta1) * g[k];
        adam_v[k] = kBeta2 * adam_v[k] + (1 - kBeta2) * g[k] * g[k];
        p[k] -= lr * (adam_m[k] / bc1) / (std::sqrt(adam_v[k] / bc2) + 1e-8);
      }
    }
    element.clamp();
  }
  manifest.final_element = element.pixels();
  return {std::move(element), std::move(manifest)};
}

}  // namespace

TrainingResult train_pattern(std::span<const DatasetSample> samples, const Detector& detector,
                             const DetectorConfig& detector_cfg, const TrainConfig& cfg,
                             const PrintableSet& printable, const StepCallback& on_step) {
  cfg.validate();
  printable.validate();
  const GradientDetector& grad_detector = require_gradients(detector);
  const double mean_side = mean_bbox_side(samples, detector_cfg.person_class_id);
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!samples[i].polygons.empty()) usable.push_back(i);
  }
  if (usable.empty()) fail(ErrorCode::kNoPolygons, "no clothing polygons in the training samples");
  const int side = element_side_for(cfg.element_fraction, mean_side, cfg.min_element_side);
  const PatternCompositor compositor(samples, side);
  return optimize(grad_detector, detector_cfg, cfg, printable, compositor,
                  std::move(usable), side, mean_side, on_step);
}

TrainingResult train_patch(std::span<const DatasetSample> samples, const Detector& detector,
                           const DetectorConfig& detector_cfg, const TrainConfig& cfg,
                           const PrintableSet& printable, const StepCallback& on_step) {
  cfg.validate();
  printable.validate();
  const GradientDetector& grad_detector = require_gradients(detector);
  const double mean_side = mean_bbox_side(samples, detector_cfg.person_class_id);
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (const auto& b : samples[i].boxes) {
      if (b.class_id == detector_cfg.person_class_id) {
        usable.push_back(i);
        break;
      }
    }
  }
  PlacementConfig placement;
  placement.scale_fraction = cfg.scale_fraction;
  placement.semantics = cfg.scale_semantics;
  const int side = std::max(
      cfg.min_element_side,
      static_cast<int>(std::lround(paste_side_for_box(mean_side, mean_side, placement))));
  const PatchCompositor compositor(samples, side, detector_cfg.person_class_id, placement);
  return optimize(grad_detector, detector_cfg, cfg, printable, compositor,
                  std::move(usable), side, mean_side, on_step);
}

TrainingResult train(std::span<const DatasetSample> samples, const Detector& detector,
                     const DetectorConfig& detector_cfg, const TrainConfig& cfg,
                     const PrintableSet& printable, const StepCallback& on_step) {
  return cfg.mode == AttackMode::kPattern
             ? train_pattern(samples, detector, detector_cfg, cfg, printable, on_step)
             : train_patch(samples, detector, detector_cfg, cfg, printable, on_step);
}

SweepResult sweep_element_size(const PatchElement& element, std::span<const DatasetSample> samples,
                               const Detector& detector, const DetectorConfig& detector_cfg,
                               std::span<const double> candidate_fractions, int min_element_side) {
  if (candidate_fractions.empty()) {
    fail(ErrorCode::kInvalidArgument, "sweep needs at least one candidate fraction");
  }
  const double mean_side = mean_bbox_side(samples, detector_cfg.person_class_id);
  std::vector<std::size_t> usable;
  std::vector<BooleanMask> masks;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].polygons.empty()) continue;
    usable.push_back(i);
    masks.push_back(clothing_mask(samples[i]));
  }
  if (usable.empty()) fail(ErrorCode::kNoPolygons, "no clothing polygons in the sweep samples");

  SweepResult result;
  for (const double fraction : candidate_fractions) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
      fail(ErrorCode::kInvalidArgument, "candidate fractions must be in (0,1]");
    }
    SweepRow row;
    row.fraction = fraction;
    row.element_side = element_side_for(fraction, mean_side, std::max(2, min_element_side));
    const PatchElement scaled = rescale_element(element, row.element_side);
    double total = 0.0;
    for (std::size_t k = 0; k < usable.size(); ++k) {
      const ImageBuffer composite = apply_masked_pattern(samples[usable[k]].image, scaled, masks[k]);
      const auto detections = detector.detect(fit_to_input(composite, detector_cfg), detector_cfg);
      total += max_person_confidence(detections, detector_cfg.person_class_id);
    }
    row.mean_confidence = total / static_cast<double>(usable.size());
    result.table.push_back(row);
  }
  const SweepRow* best = &result.table.front();
  for (const auto& row : result.table) {
    if (row.mean_confidence < best->mean_confidence ||
        (row.mean_confidence == best->mean_confidence && row.fraction < best->fraction)) {
      best = &row;
    }
  }
  result.best_fraction = best->fraction;
  return result;
}

}  // namespace tessera
