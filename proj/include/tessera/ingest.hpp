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

#ifndef TESSERA_INGEST_HPP_
#define TESSERA_INGEST_HPP_

#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tessera/geometry.hpp"
#include "tessera/image.hpp"

namespace tessera {

struct DatasetSample {
  ImageBuffer image;
  std::vector<BoundingBox> boxes;
  std::vector<ClothingPolygon> polygons;
  std::string source_path;
};

// Ordered evaluation frames for one condition; all frames share dimensions.
struct FrameSequence {
  std::vector<ImageBuffer> frames;
  std::vector<std::string> names;
  std::string label;
};

const std::set<std::string>& default_clothing_labels();

// YOLO label text: one "class cx cy w h" line per object, normalized floats.
std::vector<BoundingBox> parse_bbox_file(std::string_view text, int image_height,
                                         int image_width);
std::string format_bbox_file(std::span<const BoundingBox> boxes);

// LabelMe-style JSON: {"shapes": [{"label": ..., "points": [[x, y], ...]}]}.
// Shapes whose label is not in clothing_labels are dropped.
std::vector<ClothingPolygon> parse_polygon_file(std::string_view text,
                                                const std::set<std::string>& clothing_labels);
std::string format_polygon_file(std::span<const ClothingPolygon> polygons, int image_height,
                                int image_width);

// Average hash: grayscale, area-downsample to sqrt(bits) square, threshold at
// the mean.
struct PerceptualHash {
  int bits = 0;
  std::vector<std::uint64_t> words;

  friend bool operator==(const PerceptualHash&, const PerceptualHash&) = default;
};

PerceptualHash average_hash(const ImageBuffer& image, int hash_bits = 64);
int hamming_distance(const PerceptualHash& a, const PerceptualHash& b);

// Groups samples whose hashes lie within max_distance (transitively) and keeps
// the sample with the most pixels from each group, ties going to the earliest
// source_path. Survivors keep their input order.
std::vector<DatasetSample> deduplicate(std::vector<DatasetSample> samples, int hash_bits = 64,
                                       int max_distance = 0);

// images/<stem>.png with optional labels/<stem>.txt and polygons/<stem>.json.
// Stems are processed in sorted order; workers > 1 loads files concurrently.
std::vector<DatasetSample> load_dataset(const std::filesystem::path& root,
                                        const std::set<std::string>& clothing_labels,
                                        int workers = 1);
void write_dataset(const std::filesystem::path& root, std::span<const DatasetSample> samples);

FrameSequence load_frame_dir(const std::filesystem::path& path, std::string label = {},
                             int workers = 1);
void write_frame_dir(const std::filesystem::path& path, std::span<const ImageBuffer> frames);

}  // namespace tessera

#endif  // TESSERA_INGEST_HPP_
