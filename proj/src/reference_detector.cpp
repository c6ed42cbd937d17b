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

#include "tessera/reference_detector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "tessera/error.hpp"

namespace tessera {

namespace {

constexpr double kLeakySlope = 0.1;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

int conv_out(int in, const ConvSpec& spec) {
  const int pad = spec.kernel / 2;
  return (in + 2 * pad - spec.kernel) / spec.stride + 1;
}

}  // namespace

ReferenceArchitecture ReferenceArchitecture::standard(int width_multiplier) {
  const int m = std::max(1, width_multiplier);
  ReferenceArchitecture arch;
  const int entry = static_cast<int>(arch.anchors.size()) * (5 + arch.num_classes);
  arch.layers = {{3, 12 * m, 3, 2},
                 {12 * m, 16 * m, 3, 2},
                 {16 * m, 24 * m, 3, 2},
                 {24 * m, 24 * m, 3, 1},
                 {24 * m, entry, 3, 1}};
  return arch;
}

int ReferenceArchitecture::grid_size() const {
  int size = input_size;
  for (const auto& layer : layers) size = conv_out(size, layer);
  return size;
}

void ReferenceArchitecture::validate() const {
  if (layers.empty()) fail(ErrorCode::kInvalidArgument, "architecture has no layers");
  if (input_size < 1) fail(ErrorCode::kInvalidArgument, "input_size must be positive");
  if (layers.front().in_channels != 3) {
    fail(ErrorCode::kInvalidArgument, "first layer must take 3 channels");
  }
  for (std::size_t i = 1; i < layers.size(); ++i) {
    if (layers[i].in_channels != layers[i - 1].out_channels) {
      fail(ErrorCode::kInvalidArgument, "layer channel counts do not chain");
    }
  }
  for (const auto& layer : layers) {
    if (layer.kernel < 1 || layer.kernel % 2 == 0 || layer.stride < 1) {
      fail(ErrorCode::kInvalidArgument, "kernels must be odd and strides positive");
    }
  }
  const int entry = static_cast<int>(anchors.size()) * (5 + num_classes);
  if (layers.back().out_channels != entry) {
    fail(ErrorCode::kInvalidArgument, "head layer must emit anchors * (5 + classes) channels");
  }
  if (grid_size() < 1) fail(ErrorCode::kInvalidArgument, "input too small for architecture");
}

struct ReferenceDetector::Tensor {
  int c = 0;
  int h = 0;
  int w = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int c_, int h_, int w_) : c(c_), h(h_), w(w_), v(static_cast<std::size_t>(c_) * h_ * w_) {}
  double* plane(int ch) { return v.data() + static_cast<std::size_t>(ch) * h * w; }
  const double* plane(int ch) const { return v.data() + static_cast<std::size_t>(ch) * h * w; }
};

class ReferenceDetector::Tape final : public ForwardTape {
 public:
  std::vector<Tensor> inputs;       // input to each layer
  std::vector<Tensor> pre;          // pre-activation output of each layer
  std::vector<double> head_logits;  // RawGrid layout
};

namespace {

// Valid output index range [lo, hi) for a kernel tap offset so that
// 0 <= o*stride + offset < in.
void valid_range(int offset, int stride, int in, int out, int& lo, int& hi) {
  lo = offset >= 0 ? 0 : (-offset + stride - 1) / stride;
  hi = (in - offset + stride - 1) / stride;
  hi = std::clamp(hi, 0, out);
  lo = std::min(lo, hi);
}

}  // namespace

ReferenceDetector::ReferenceDetector(ReferenceArchitecture arch, std::uint64_t seed,
                                     std::string name)
    : arch_(std::move(arch)), name_(std::move(name)) {
  arch_.validate();
  std::size_t total = 0;
  for (const auto& layer : arch_.layers) {
    weight_offsets_.push_back(total);
    total += static_cast<std::size_t>(layer.out_channels) * layer.in_channels * layer.kernel *
             layer.kernel;
    bias_offsets_.push_back(total);
    total += layer.out_channels;
  }
  params_.assign(total, 0.0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t l = 0; l < arch_.layers.size(); ++l) {
    const auto& layer = arch_.layers[l];
    const double fan_in = static_cast<double>(layer.in_channels) * layer.kernel * layer.kernel;
    const bool head = l + 1 == arch_.layers.size();
    const double std_dev = head ? 0.01 : std::sqrt(2.0 / fan_in);
    for (std::size_t i = weight_offsets_[l]; i < bias_offsets_[l]; ++i) {
      params_[i] = std_dev * normal(rng);
    }
  }
  // Objectness starts near a low prior so early training is not dominated by
  // the many empty cells.
  const std::size_t head_bias = bias_offsets_.back();
  const int entry = 5 + arch_.num_classes;
  for (std::size_t a = 0; a < arch_.anchors.size(); ++a) {
    params_[head_bias + a * entry + RawGrid::kObjectness] = -4.0;
  }
}

ReferenceDetector::ReferenceDetector(ReferenceArchitecture arch, std::vector<double> parameters,
                                     std::string name)
    : ReferenceDetector(std::move(arch), 0, std::move(name)) {
  if (parameters.size() != params_.size()) {
    fail(ErrorCode::kInvalidArgument, "parameter count does not match architecture: expected " +
                                          std::to_string(params_.size()) + ", got " +
                                          std::to_string(parameters.size()));
  }
  params_ = std::move(parameters);
}

void ReferenceDetector::check_input(const ImageBuffer& image, const DetectorConfig& cfg) const {
  if (cfg.input_size != 0 && cfg.input_size != arch_.input_size) {
    fail(ErrorCode::kAdapterFailure, "detector '" + name_ + "' expects input_size " +
                                         std::to_string(arch_.input_size) + ", config says " +
                                         std::to_string(cfg.input_size));
  }
  if (image.height() != arch_.input_size || image.width() != arch_.input_size ||
      image.channels() != 3) {
    fail(ErrorCode::kAdapterFailure,
         "detector '" + name_ + "' expects " + std::to_string(arch_.input_size) + "x" +
             std::to_string(arch_.input_size) + "x3 input, got " + std::to_string(image.height()) +
             "x" + std::to_string(image.width()) + "x" + std::to_string(image.channels()));
  }
}

RawGrid ReferenceDetector::run(const ImageBuffer& image, Tape* tape) const {
  const int size = arch_.input_size;
  Tensor x(3, size, size);
  for (int y = 0; y < size; ++y) {
    for (int xx = 0; xx < size; ++xx) {
      for (int c = 0; c < 3; ++c) x.plane(c)[y * size + xx] = image.at(y, xx, c);
    }
  }
  const std::size_t n_layers = arch_.layers.size();
  for (std::size_t l = 0; l < n_layers; ++l) {
    const auto& spec = arch_.layers[l];
    const int pad = spec.kernel / 2;
    const int oh = conv_out(x.h, spec);
    const int ow = conv_out(x.w, spec);
    Tensor out(spec.out_channels, oh, ow);
    const double* weights = params_.data() + weight_offsets_[l];
    const double* bias = params_.data() + bias_offsets_[l];
    for (int oc = 0; oc < spec.out_channels; ++oc) {
      double* dst = out.plane(oc);
      std::fill(dst, dst + static_cast<std::size_t>(oh) * ow, bias[oc]);
      for (int ic = 0; ic < spec.in_channels; ++ic) {
        const double* src = x.plane(ic);
        for (int ky = 0; ky < spec.kernel; ++ky) {
          int oy0, oy1;
          valid_range(ky - pad, spec.stride, x.h, oh, oy0, oy1);
          for (int kx = 0; kx < spec.kernel; ++kx) {
            const double wgt =
                weights[((static_cast<std::size_t>(oc) * spec.in_channels + ic) * spec.kernel + ky) *
                            spec.kernel + kx];
            int ox0, ox1;
            valid_range(kx - pad, spec.stride, x.w, ow, ox0, ox1);
            for (int oy = oy0; oy < oy1; ++oy) {
              const double* row = src + static_cast<std::size_t>(oy * spec.stride + ky - pad) * x.w;
              double* drow = dst + static_cast<std::size_t>(oy) * ow;
              const int stride = spec.stride;
              const int shift = kx - pad;
              for (int ox = ox0; ox < ox1; ++ox) drow[ox] += wgt * row[ox * stride + shift];
            }
          }
        }
      }
    }
    if (tape) {
      tape->inputs.push_back(std::move(x));
      tape->pre.push_back(out);
    }
    if (l + 1 < n_layers) {
      for (double& v : out.v) v = v > 0.0 ? v : kLeakySlope * v;
    }
    x = std::move(out);
  }

  // x now holds head logits in channel-major layout.
  RawGrid grid(x.h, arch_.num_classes, arch_.anchors);
  const int entry = grid.entry_size();
  std::vector<double> logits(grid.values().size());
  for (int gy = 0; gy < x.h; ++gy) {
    for (int gx = 0; gx < x.w; ++gx) {
      for (int a = 0; a < grid.num_anchors(); ++a) {
        for (int k = 0; k < entry; ++k) {
          logits[grid.offset(gy, gx, a, k)] = x.plane(a * entry + k)[gy * x.w + gx];
        }
        const auto at = [&](int k) { return logits[grid.offset(gy, gx, a, k)]; };
        grid.at(gy, gx, a, RawGrid::kX) = sigmoid(at(RawGrid::kX));
        grid.at(gy, gx, a, RawGrid::kY) = sigmoid(at(RawGrid::kY));
        grid.at(gy, gx, a, RawGrid::kW) = at(RawGrid::kW);
        grid.at(gy, gx, a, RawGrid::kH) = at(RawGrid::kH);
        grid.at(gy, gx, a, RawGrid::kObjectness) = sigmoid(at(RawGrid::kObjectness));
        double max_logit = at(RawGrid::kFirstClass);
        for (int c = 1; c < arch_.num_classes; ++c) {
          max_logit = std::max(max_logit, at(RawGrid::kFirstClass + c));
        }
        double total = 0.0;
        for (int c = 0; c < arch_.num_classes; ++c) {
          total += std::exp(at(RawGrid::kFirstClass + c) - max_logit);
        }
        for (int c = 0; c < arch_.num_classes; ++c) {
          grid.at(gy, gx, a, RawGrid::kFirstClass + c) =
              std::exp(at(RawGrid::kFirstClass + c) - max_logit) / total;
        }
      }
    }
  }
  if (tape) tape->head_logits = std::move(logits);
  return grid;
}

RawGrid ReferenceDetector::forward(const ImageBuffer& image, const DetectorConfig& cfg) const {
  check_input(image, cfg);
  return run(image, nullptr);
}

TracedForward ReferenceDetector::forward_traced(const ImageBuffer& image,
                                                const DetectorConfig& cfg) const {
  check_input(image, cfg);
  auto tape = std::make_unique<Tape>();
  RawGrid grid = run(image, tape.get());
  return {std::move(grid), std::move(tape)};
}

std::span<const double> ReferenceDetector::head_logits(const TracedForward& traced) {
  const auto* tape = dynamic_cast<const Tape*>(traced.tape.get());
  if (!tape) fail(ErrorCode::kInvalidArgument, "forward pass was not traced by this detector");
  return tape->head_logits;
}

void ReferenceDetector::backprop(const Tape& tape, std::vector<double> grad_logits,
                                 std::vector<double>* grad_input,
                                 std::span<double> param_grad) const {
  const std::size_t n_layers = arch_.layers.size();
  // Convert RawGrid-layout logit gradients to channel-major.
  const Tensor& head_pre = tape.pre.back();
  RawGrid layout(head_pre.h, arch_.num_classes, arch_.anchors);
  const int entry = layout.entry_size();
  Tensor grad(head_pre.c, head_pre.h, head_pre.w);
  for (int gy = 0; gy < head_pre.h; ++gy) {
    for (int gx = 0; gx < head_pre.w; ++gx) {
      for (int a = 0; a < layout.num_anchors(); ++a) {
        for (int k = 0; k < entry; ++k) {
          grad.plane(a * entry + k)[gy * head_pre.w + gx] = grad_logits[layout.offset(gy, gx, a, k)];
        }
      }
    }
  }

  const bool want_params = !param_grad.empty();
  for (std::size_t li = n_layers; li-- > 0;) {
    const auto& spec = arch_.layers[li];
    const Tensor& in = tape.inputs[li];
    const Tensor& pre = tape.pre[li];
    if (li + 1 < n_layers) {
      for (std::size_t i = 0; i < grad.v.size(); ++i) {
        if (pre.v[i] <= 0.0) grad.v[i] *= kLeakySlope;
      }
    }
    const bool need_input_grad = li > 0 || grad_input != nullptr;
    Tensor grad_in;
    if (need_input_grad) grad_in = Tensor(in.c, in.h, in.w);
    const int pad = spec.kernel / 2;
    const int oh = grad.h;
    const int ow = grad.w;
    const double* weights = params_.data() + weight_offsets_[li];
    double* wgrad = want_params ? param_grad.data() + weight_offsets_[li] : nullptr;
    double* bgrad = want_params ? param_grad.data() + bias_offsets_[li] : nullptr;
    for (int oc = 0; oc < spec.out_channels; ++oc) {
      const double* g = grad.plane(oc);
      if (bgrad) {
        double s = 0.0;
        for (std::size_t i = 0; i < static_cast<std::size_t>(oh) * ow; ++i) s += g[i];
        bgrad[oc] += s;
      }
      for (int ic = 0; ic < spec.in_channels; ++ic) {
        const double* src = in.plane(ic);
        double* gsrc = need_input_grad ? grad_in.plane(ic) : nullptr;
        for (int ky = 0; ky < spec.kernel; ++ky) {
          int oy0, oy1;
          valid_range(ky - pad, spec.stride, in.h, oh, oy0, oy1);
          for (int kx = 0; kx < spec.kernel; ++kx) {
            const std::size_t widx =
                ((static_cast<std::size_t>(oc) * spec.in_channels + ic) * spec.kernel + ky) *
                    spec.kernel + kx;
            const double wgt = weights[widx];
            int ox0, ox1;
            valid_range(kx - pad, spec.stride, in.w, ow, ox0, ox1);
            const int stride = spec.stride;
            const int shift = kx - pad;
            double acc = 0.0;
            for (int oy = oy0; oy < oy1; ++oy) {
              const std::size_t row_off = static_cast<std::size_t>(oy * stride + ky - pad) * in.w;
              const double* grow = g + static_cast<std::size_t>(oy) * ow;
              if (gsrc) {
                double* gr = gsrc + row_off;
                for (int ox = ox0; ox < ox1; ++ox) gr[ox * stride + shift] += wgt * grow[ox];
              }
              if (wgrad) {
                const double* row = src + row_off;
                for (int ox = ox0; ox < ox1; ++ox) acc += grow[ox] * row[ox * stride + shift];
              }
            }
            if (wgrad) wgrad[widx] += acc;
          }
        }
      }
    }
    if (!need_input_grad) break;
    grad = std::move(grad_in);
  }
  if (grad_input) *grad_input = std::move(grad.v);
}

ImageBuffer ReferenceDetector::backward(const TracedForward& traced, const RawGrid& grad_grid) const {
  const auto* tape = dynamic_cast<const Tape*>(traced.tape.get());
  if (!tape) fail(ErrorCode::kInvalidArgument, "forward pass was not traced by this detector");
  const RawGrid& grid = traced.grid;
  if (grad_grid.values().size() != grid.values().size()) {
    fail(ErrorCode::kDimensionMismatch, "grid gradient does not match the traced grid");
  }
  // Chain through the head activations.
  std::vector<double> grad_logits(grid.values().size());
  const int s = grid.grid_size();
  for (int gy = 0; gy < s; ++gy) {
    for (int gx = 0; gx < s; ++gx) {
      for (int a = 0; a < grid.num_anchors(); ++a) {
        for (int k : {RawGrid::kX, RawGrid::kY, RawGrid::kObjectness}) {
          const double p = grid.at(gy, gx, a, k);
          grad_logits[grid.offset(gy, gx, a, k)] = grad_grid.at(gy, gx, a, k) * p * (1.0 - p);
        }
        for (int k : {RawGrid::kW, RawGrid::kH}) {
          grad_logits[grid.offset(gy, gx, a, k)] = grad_grid.at(gy, gx, a, k);
        }
        double dot = 0.0;
        for (int c = 0; c < grid.num_classes(); ++c) {
          dot += grad_grid.class_probability(gy, gx, a, c) * grid.class_probability(gy, gx, a, c);
        }
        for (int c = 0; c < grid.num_classes(); ++c) {
          const double p = grid.class_probability(gy, gx, a, c);
          grad_logits[grid.offset(gy, gx, a, RawGrid::kFirstClass + c)] =
              p * (grad_grid.class_probability(gy, gx, a, c) - dot);
        }
      }
    }
  }
  std::vector<double> grad_input;
  backprop(*tape, std::move(grad_logits), &grad_input, {});
  const int size = arch_.input_size;
  ImageBuffer out(size, size, 3);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      for (int c = 0; c < 3; ++c) {
        out.at(y, x, c) = grad_input[(static_cast<std::size_t>(c) * size + y) * size + x];
      }
    }
  }
  return out;
}

void ReferenceDetector::backward_parameters_from_logits(const TracedForward& traced,
                                                        std::span<const double> logit_grad,
                                                        std::span<double> param_grad) const {
  const auto* tape = dynamic_cast<const Tape*>(traced.tape.get());
  if (!tape) fail(ErrorCode::kInvalidArgument, "forward pass was not traced by this detector");
  if (param_grad.size() != params_.size()) {
    fail(ErrorCode::kDimensionMismatch, "parameter gradient buffer has the wrong size");
  }
  backprop(*tape, std::vector<double>(logit_grad.begin(), logit_grad.end()), nullptr, param_grad);
}

nlohmann::json ReferenceDetector::to_json() const {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : arch_.layers) {
    layers.push_back({{"in", l.in_channels}, {"out", l.out_channels}, {"kernel", l.kernel},
                      {"stride", l.stride}});
  }
  nlohmann::json anchors = nlohmann::json::array();
  for (const auto& [w, h] : arch_.anchors) anchors.push_back({w, h});
  return {{"schema", 1},
          {"kind", "reference"},
          {"name", name_},
          {"input_size", arch_.input_size},
          {"num_classes", arch_.num_classes},
          {"anchors", anchors},
          {"layers", layers},
          {"parameters", params_}};
}

ReferenceDetector ReferenceDetector::from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("schema").get<int>() != 1 || doc.at("kind").get<std::string>() != "reference") {
      fail(ErrorCode::kParseError, "unsupported detector weights schema");
    }
    ReferenceArchitecture arch;
    arch.input_size = doc.at("input_size").get<int>();
    arch.num_classes = doc.at("num_classes").get<int>();
    arch.anchors.clear();
    for (const auto& a : doc.at("anchors")) {
      arch.anchors.emplace_back(a.at(0).get<double>(), a.at(1).get<double>());
    }
    for (const auto& l : doc.at("layers")) {
      arch.layers.push_back({l.at("in").get<int>(), l.at("out").get<int>(),
                             l.at("kernel").get<int>(), l.at("stride").get<int>()});
    }
    return ReferenceDetector(std::move(arch), doc.at("parameters").get<std::vector<double>>(),
                             doc.value("name", std::string("reference")));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParseError, std::string("detector weights: ") + e.what());
  }
}

void ReferenceDetector::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
  out << to_json().dump() << '\n';
}

ReferenceDetector ReferenceDetector::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot read detector weights " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
  return from_json(doc);
}

}  // namespace tessera
