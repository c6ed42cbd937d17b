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

#include "tessera/ingest.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "tessera/error.hpp"
#include "tessera/image_io.hpp"
#include "tessera/parallel.hpp"
#include "tessera/resample.hpp"

namespace fs = std::filesystem;

namespace tessera {

const std::set<std::string>& default_clothing_labels() {
  static const std::set<std::string> labels = {"shirt", "jacket", "coat", "pants",
                                               "dress", "skirt",  "shorts", "sweater"};
  return labels;
}

std::vector<BoundingBox> parse_bbox_file(std::string_view text, int image_height,
                                         int image_width) {
  if (image_height < 1 || image_width < 1) {
    fail(ErrorCode::kInvalidArgument, "image dimensions must be positive");
  }
  std::vector<BoundingBox> boxes;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    BoundingBox box;
    std::string extra;
    if (!(fields >> box.class_id >> box.cx >> box.cy >> box.w >> box.h) || (fields >> extra)) {
      fail(ErrorCode::kParseError,
           fmt::format("line {}: expected 'class cx cy w h', got '{}'", line_no, line));
    }
    for (double v : {box.cx, box.cy, box.w, box.h}) {
      if (!(v >= 0.0 && v <= 1.0)) {
        fail(ErrorCode::kRangeError,
             fmt::format("line {}: coordinate {} outside [0,1]", line_no, v));
      }
    }
    if (box.w <= 0.0 || box.h <= 0.0) {
      fail(ErrorCode::kRangeError, fmt::format("line {}: box has zero extent", line_no));
    }
    boxes.push_back(box);
  }
  return boxes;
}

std::string format_bbox_file(std::span<const BoundingBox> boxes) {
  std::string out;
  for (const auto& b : boxes) {
    // {} prints the shortest representation that parses back to the same double.
    out += fmt::format("{} {} {} {} {}\n", b.class_id, b.cx, b.cy, b.w, b.h);
  }
  return out;
}

std::vector<ClothingPolygon> parse_polygon_file(std::string_view text,
                                                const std::set<std::string>& clothing_labels) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParseError, std::string("polygon file: ") + e.what());
  }
  std::vector<ClothingPolygon> polygons;
  try {
    for (const auto& shape : doc.at("shapes")) {
      ClothingPolygon poly;
      poly.label = shape.at("label").get<std::string>();
      const auto& points = shape.at("points");
      if (!clothing_labels.contains(poly.label)) continue;
      for (const auto& p : points) {
        if (!p.is_array() || p.size() != 2) {
          fail(ErrorCode::kParseError, "polygon point must be [x, y]");
        }
        poly.vertices.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      }
      poly.validate();
      polygons.push_back(std::move(poly));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParseError, std::string("polygon file: ") + e.what());
  }
  return polygons;
}

std::string format_polygon_file(std::span<const ClothingPolygon> polygons, int image_height,
                                int image_width) {
  nlohmann::json shapes = nlohmann::json::array();
  for (const auto& poly : polygons) {
    nlohmann::json points = nlohmann::json::array();
    for (const auto& v : poly.vertices) points.push_back({v.x, v.y});
    shapes.push_back({{"label", poly.label}, {"points", points}, {"shape_type", "polygon"}});
  }
  nlohmann::json doc = {
      {"shapes", shapes}, {"imageHeight", image_height}, {"imageWidth", image_width}};
  return doc.dump(2) + "\n";
}

PerceptualHash average_hash(const ImageBuffer& image, int hash_bits) {
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(hash_bits))));
  if (hash_bits < 4 || side * side != hash_bits) {
    fail(ErrorCode::kInvalidArgument, "hash size must be a perfect square >= 4");
  }
  ImageBuffer gray(image.height(), image.width(), 1);
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      if (image.channels() == 1) {
        gray.at(y, x, 0) = image.at(y, x, 0);
      } else {
        // ITU-R 601-2 luma, as used by common "L" conversions.
        gray.at(y, x, 0) = 0.299 * image.at(y, x, 0) + 0.587 * image.at(y, x, 1) +
                           0.114 * image.at(y, x, 2);
      }
    }
  }
  const ImageBuffer small = resize(gray, side, side, ResizeKernel::kArea);
  const auto values = small.data();
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
  PerceptualHash hash;
  hash.bits = hash_bits;
  hash.words.assign((hash_bits + 63) / 64, 0);
  for (int i = 0; i < hash_bits; ++i) {
    if (values[i] > mean) hash.words[i / 64] |= std::uint64_t{1} << (i % 64);
  }
  return hash;
}

int hamming_distance(const PerceptualHash& a, const PerceptualHash& b) {
  if (a.bits != b.bits) fail(ErrorCode::kInvalidArgument, "hash sizes differ");
  int d = 0;
  for (std::size_t i = 0; i < a.words.size(); ++i) d += std::popcount(a.words[i] ^ b.words[i]);
  return d;
}

namespace {

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

}  // namespace

std::vector<DatasetSample> deduplicate(std::vector<DatasetSample> samples, int hash_bits,
                                       int max_distance) {
  if (max_distance < 0) fail(ErrorCode::kInvalidArgument, "max_distance must be >= 0");
  const std::size_t n = samples.size();
  std::vector<PerceptualHash> hashes;
  hashes.reserve(n);
  for (const auto& s : samples) hashes.push_back(average_hash(s.image, hash_bits));

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (hamming_distance(hashes[i], hashes[j]) <= max_distance) {
        parent[find_root(parent, j)] = find_root(parent, i);
      }
    }
  }

  // Best representative per group.
  const auto better = [&](std::size_t a, std::size_t b) {
    const auto pa = samples[a].image.pixel_count();
    const auto pb = samples[b].image.pixel_count();
    if (pa != pb) return pa > pb;
    if (samples[a].source_path != samples[b].source_path) {
      return samples[a].source_path < samples[b].source_path;
    }
    return a < b;
  };
  std::vector<std::size_t> best(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = find_root(parent, i);
    if (best[root] == n || better(i, best[root])) best[root] = i;
  }
  std::vector<bool> keep(n, false);
  for (std::size_t r = 0; r < n; ++r) {
    if (best[r] != n) keep[best[r]] = true;
  }
  std::vector<DatasetSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i]) out.push_back(std::move(samples[i]));
  }
  return out;
}

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
}

std::vector<fs::path> sorted_images(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  return files;
}

}  // namespace

std::vector<DatasetSample> load_dataset(const fs::path& root,
                                        const std::set<std::string>& clothing_labels,
                                        int workers) {
  const fs::path images = root / "images";
  if (!fs::is_directory(images)) {
    fail(ErrorCode::kIoError, "dataset has no images/ directory: " + root.string());
  }
  const auto files = sorted_images(images);
  if (files.empty()) fail(ErrorCode::kEmptyDirectory, "no images in " + images.string());
  std::vector<std::optional<DatasetSample>> slots(files.size());
  parallel_for(files.size(), workers, [&](std::size_t i) {
    const fs::path& image_path = files[i];
    const std::string stem = image_path.stem().string();
    DatasetSample sample{read_image(image_path), {}, {}, image_path.string()};
    const fs::path label_path = root / "labels" / (stem + ".txt");
    if (fs::exists(label_path)) {
      try {
        sample.boxes = parse_bbox_file(read_text(label_path), sample.image.height(),
                                       sample.image.width());
      } catch (const Error& e) {
        throw Error(e.code(), label_path.string() + ": " + e.what());
      }
    }
    const fs::path poly_path = root / "polygons" / (stem + ".json");
    if (fs::exists(poly_path)) {
      try {
        sample.polygons = parse_polygon_file(read_text(poly_path), clothing_labels);
      } catch (const Error& e) {
        throw Error(e.code(), poly_path.string() + ": " + e.what());
      }
    }
    slots[i] = std::move(sample);
  });
  std::vector<DatasetSample> samples;
  samples.reserve(slots.size());
  for (auto& s : slots) samples.push_back(std::move(*s));
  return samples;
}

void write_dataset(const fs::path& root, std::span<const DatasetSample> samples) {
  fs::create_directories(root / "images");
  fs::create_directories(root / "labels");
  fs::create_directories(root / "polygons");
  for (const auto& s : samples) {
    const std::string stem = fs::path(s.source_path).stem().string();
    write_png(s.image, root / "images" / (stem + ".png"));
    write_text(root / "labels" / (stem + ".txt"), format_bbox_file(s.boxes));
    write_text(root / "polygons" / (stem + ".json"),
               format_polygon_file(s.polygons, s.image.height(), s.image.width()));
  }
}

FrameSequence load_frame_dir(const fs::path& path, std::string label, int workers) {
  if (!fs::is_directory(path)) fail(ErrorCode::kIoError, "no such frame directory " + path.string());
  const auto files = sorted_images(path);
  if (files.empty()) fail(ErrorCode::kEmptyDirectory, "no frames in " + path.string());
  std::vector<std::optional<ImageBuffer>> slots(files.size());
  parallel_for(files.size(), workers, [&](std::size_t i) { slots[i] = read_image(files[i]); });
  FrameSequence seq;
  seq.label = label.empty() ? path.filename().string() : std::move(label);
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (!slots[i]->same_shape(*slots[0])) {
      fail(ErrorCode::kDimensionMismatch,
           fmt::format("{} is {}x{}, expected {}x{}", files[i].string(), slots[i]->width(),
                       slots[i]->height(), slots[0]->width(), slots[0]->height()));
    }
    seq.frames.push_back(std::move(*slots[i]));
    seq.names.push_back(files[i].filename().string());
  }
  return seq;
}

void write_frame_dir(const fs::path& path, std::span<const ImageBuffer> frames) {
  fs::create_directories(path);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    write_png(frames[i], path / fmt::format("{:05d}.png", i));
  }
}

}  // namespace tessera
