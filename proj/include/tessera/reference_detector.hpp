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

#ifndef TESSERA_REFERENCE_DETECTOR_HPP_
#define TESSERA_REFERENCE_DETECTOR_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tessera/detector.hpp"

namespace tessera {

struct ConvSpec {
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 3;
  int stride = 1;
};

// A small single-scale grid detector: stacked 3x3 convolutions with leaky ReLU,
// the last layer emitting anchors * (5 + classes) channels per cell.
struct ReferenceArchitecture {
  int input_size = 64;
  int num_classes = 2;
  std::vector<std::pair<double, double>> anchors = {{0.30, 0.62}};
  std::vector<ConvSpec> layers;

  // Five conv layers, three of them stride 2, giving an 8x8 grid at 64 px.
  static ReferenceArchitecture standard(int width_multiplier = 1);
  int grid_size() const;
  void validate() const;
};

class ReferenceDetector final : public GradientDetector {
 public:
  // He-initialized weights; deterministic in seed.
  ReferenceDetector(ReferenceArchitecture arch, std::uint64_t seed, std::string name = "reference");
  ReferenceDetector(ReferenceArchitecture arch, std::vector<double> parameters, std::string name);

  std::string name() const override { return name_; }
  const ReferenceArchitecture& architecture() const noexcept { return arch_; }

  RawGrid forward(const ImageBuffer& image, const DetectorConfig& cfg) const override;
  TracedForward forward_traced(const ImageBuffer& image, const DetectorConfig& cfg) const override;
  ImageBuffer backward(const TracedForward& traced, const RawGrid& grad_grid) const override;

  // dL/d(head logits) -> accumulates dL/d(parameters) into param_grad.
  // Used when training the detector itself, where losses are written directly
  // against logits for numerical stability.
  void backward_parameters_from_logits(const TracedForward& traced,
                                       std::span<const double> logit_grad,
                                       std::span<double> param_grad) const;
  // Head pre-activation values recorded by forward_traced, laid out like RawGrid.
  static std::span<const double> head_logits(const TracedForward& traced);

  std::span<double> parameters() noexcept { return params_; }
  std::span<const double> parameters() const noexcept { return params_; }

  nlohmann::json to_json() const;
  static ReferenceDetector from_json(const nlohmann::json& doc);
  void save(const std::filesystem::path& path) const;
  static ReferenceDetector load(const std::filesystem::path& path);

 private:
  struct Tensor;
  class Tape;

  void check_input(const ImageBuffer& image, const DetectorConfig& cfg) const;
  RawGrid run(const ImageBuffer& image, Tape* tape) const;
  void backprop(const Tape& tape, std::vector<double> grad_logits, std::vector<double>* grad_input,
                std::span<double> param_grad) const;

  ReferenceArchitecture arch_;
  std::string name_;
  std::vector<double> params_;
  std::vector<std::size_t> weight_offsets_;
  std::vector<std::size_t> bias_offsets_;
};

}  // namespace tessera

#endif  // TESSERA_REFERENCE_DETECTOR_HPP_
