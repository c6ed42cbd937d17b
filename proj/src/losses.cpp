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

#include "tessera/losses.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "tessera/error.hpp"

namespace tessera {

void LossWeights::validate() const {
  if (!(detection > 0.0)) fail(ErrorCode::kInvalidArgument, "detection weight must be > 0");
  if (!(tv >= 0.0) || !(nps >= 0.0)) {
    fail(ErrorCode::kInvalidArgument, "loss weights must be non-negative");
  }
}

PrintableSet PrintableSet::parse_csv(std::string_view text) {
  PrintableSet set;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  bool seen_content = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const bool first_content = !seen_content;
    seen_content = true;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    Rgb c{};
    if (!(fields >> c[0] >> c[1] >> c[2])) {
      if (first_content) continue;  // header
      fail(ErrorCode::kParseError, "printable set line " + std::to_string(line_no) +
                                       ": expected r,g,b");
    }
    for (double v : c) {
      if (!(v >= 0.0 && v <= 1.0)) {
        fail(ErrorCode::kRangeError, "printable set line " + std::to_string(line_no) +
                                         ": component outside [0,1]");
      }
    }
    set.colors.push_back(c);
  }
  set.validate();
  return set;
}

PrintableSet PrintableSet::load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot read printable set " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str());
}

void PrintableSet::validate() const {
  if (colors.empty()) fail(ErrorCode::kInvalidArgument, "printable set is empty");
  for (std::size_t i = 0; i < colors.size(); ++i) {
    for (std::size_t j = i + 1; j < colors.size(); ++j) {
      if (colors[i] == colors[j]) {
        fail(ErrorCode::kInvalidArgument, "printable set has duplicate colors");
      }
    }
  }
}

namespace {

template <typename Fn>
void for_each_person_score(const RawGrid& grid, int person_class_id, Fn&& fn) {
  if (person_class_id < 0 || person_class_id >= grid.num_classes()) {
    fail(ErrorCode::kInvalidArgument, "person class id outside the grid's classes");
  }
  const int s = grid.grid_size();
  for (int gy = 0; gy < s; ++gy) {
    for (int gx = 0; gx < s; ++gx) {
      for (int a = 0; a < grid.num_anchors(); ++a) {
        fn(gy, gx, a, grid.objectness(gy, gx, a) * grid.class_probability(gy, gx, a, person_class_id));
      }
    }
  }
}

}  // namespace

GridLoss detection_loss_with_gradient(const RawGrid& grid, int person_class_id,
                                      const DetectionLossOptions& options) {
  GridLoss out{0.0, grid.zeros_like()};
  const int obj_field = RawGrid::kObjectness;
  const int cls_field = RawGrid::kFirstClass + person_class_id;
  if (!options.smooth) {
    double best = -1.0;
    int by = 0, bx = 0, ba = 0;
    for_each_person_score(grid, person_class_id, [&](int gy, int gx, int a, double score) {
      if (score > best) {
        best = score;
        by = gy;
        bx = gx;
        ba = a;
      }
    });
    out.value = best;
    out.gradient.at(by, bx, ba, obj_field) = grid.class_probability(by, bx, ba, person_class_id);
    out.gradient.at(by, bx, ba, cls_field) = grid.objectness(by, bx, ba);
    return out;
  }
  if (!(options.temperature > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "smooth-max temperature must be > 0");
  }
  const double tau = options.temperature;
  double best = -std::numeric_limits<double>::infinity();
  for_each_person_score(grid, person_class_id,
                        [&](int, int, int, double score) { best = std::max(best, score); });
  double total = 0.0;
  for_each_person_score(grid, person_class_id,
                        [&](int, int, int, double score) { total += std::exp((score - best) / tau); });
  out.value = best + tau * std::log(total);
  for_each_person_score(grid, person_class_id, [&](int gy, int gx, int a, double score) {
    const double weight = std::exp((score - best) / tau) / total;
    out.gradient.at(gy, gx, a, obj_field) = weight * grid.class_probability(gy, gx, a, person_class_id);
    out.gradient.at(gy, gx, a, cls_field) = weight * grid.objectness(gy, gx, a);
  });
  return out;
}

double detection_loss(const RawGrid& grid, int person_class_id,
                      const DetectionLossOptions& options) {
  return detection_loss_with_gradient(grid, person_class_id, options).value;
}

ElementLoss total_variation_with_gradient(const PatchElement& element) {
  const int side = element.side();
  const int channels = element.channels();
  const double norm = static_cast<double>(side) * side;
  ElementLoss out{0.0, ImageBuffer(side, side, channels)};
  for (int c = 0; c < channels; ++c) {
    for (int i = 0; i + 1 < side; ++i) {
      for (int j = 0; j + 1 < side; ++j) {
        const double p = element.at(i, j, c);
        const double dx = element.at(i, j + 1, c) - p;
        const double dy = element.at(i + 1, j, c) - p;
        const double term = std::sqrt(dx * dx + dy * dy + kTvEpsilon);
        out.value += term;
        out.gradient.at(i, j + 1, c) += dx / term / norm;
        out.gradient.at(i + 1, j, c) += dy / term / norm;
        out.gradient.at(i, j, c) -= (dx + dy) / term / norm;
      }
    }
  }
  out.value /= norm;
  return out;
}

double total_variation(const PatchElement& element) {
  return total_variation_with_gradient(element).value;
}

ElementLoss non_printability_with_gradient(const PatchElement& element,
                                           const PrintableSet& printable) {
  printable.validate();
  if (element.channels() != 3) {
    fail(ErrorCode::kInvalidArgument, "non-printability needs an RGB element");
  }
  const int side = element.side();
  const double count = static_cast<double>(side) * side;
  ElementLoss out{0.0, ImageBuffer(side, side, 3)};
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      double best = std::numeric_limits<double>::infinity();
      const Rgb* nearest = nullptr;
      for (const auto& color : printable.colors) {
        double d2 = 0.0;
        for (int c = 0; c < 3; ++c) {
          const double d = element.at(y, x, c) - color[c];
          d2 += d * d;
        }
        if (d2 < best) {
          best = d2;
          nearest = &color;
        }
      }
      const double dist = std::sqrt(best);
      out.value += dist;
      if (dist > 0.0) {
        for (int c = 0; c < 3; ++c) {
          out.gradient.at(y, x, c) = (element.at(y, x, c) - (*nearest)[c]) / dist / count;
        }
      }
    }
  }
  out.value /= count;
  return out;
}

double non_printability(const PatchElement& element, const PrintableSet& printable) {
  return non_printability_with_gradient(element, printable).value;
}

CombinedGradient combined_loss_with_gradient(const RawGrid& grid, const PatchElement& element,
                                             const LossWeights& weights,
                                             const PrintableSet& printable, int person_class_id,
                                             const DetectionLossOptions& options) {
  weights.validate();
  GridLoss det = detection_loss_with_gradient(grid, person_class_id, options);
  const ElementLoss tv = total_variation_with_gradient(element);
  const ElementLoss nps = non_printability_with_gradient(element, printable);
  CombinedGradient out{weights.detection * det.value + weights.tv * tv.value +
                           weights.nps * nps.value,
                       std::move(det.gradient), ImageBuffer(element.side(), element.side(),
                                                            element.channels())};
  for (double& g : out.grid_gradient.values()) g *= weights.detection;
  auto eg = out.element_gradient.data();
  const auto tg = tv.gradient.data();
  const auto ng = nps.gradient.data();
  for (std::size_t i = 0; i < eg.size(); ++i) eg[i] = weights.tv * tg[i] + weights.nps * ng[i];
  return out;
}

double combined_loss(const RawGrid& grid, const PatchElement& element, const LossWeights& weights,
                     const PrintableSet& printable, int person_class_id,
                     const DetectionLossOptions& options) {
  return combined_loss_with_gradient(grid, element, weights, printable, person_class_id, options)
      .value;
}

}  // namespace tessera
