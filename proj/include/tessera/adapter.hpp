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

#ifndef TESSERA_ADAPTER_HPP_
#define TESSERA_ADAPTER_HPP_

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tessera/detector.hpp"

namespace tessera {

// Wire format, schema 1. A request is a multipart POST with an "image" part
// (PNG bytes) and a "config" part (JSON DetectorConfig). The response is
//   {"schema": 1, "detections": [{"bbox": [cx, cy, w, h], "class_id": k,
//                                 "confidence": p}, ...]}
// with bbox normalized to the image.
inline constexpr int kAdapterSchema = 1;

nlohmann::json detector_config_to_json(const DetectorConfig& cfg);
DetectorConfig detector_config_from_json(const nlohmann::json& doc);
nlohmann::json detections_to_json(std::span<const Detection> detections);
// Throws AdapterFailure on a malformed or wrong-schema document.
std::vector<Detection> detections_from_json(const nlohmann::json& doc);

// Detector behind an HTTP endpoint such as "http://127.0.0.1:8080/detect".
// No gradients; usable for evaluation and transfer only.
class HttpDetector final : public Detector {
 public:
  HttpDetector(std::string name, std::string url, int timeout_seconds = 30);

  std::string name() const override { return name_; }
  std::vector<Detection> detect(const ImageBuffer& image, const DetectorConfig& cfg) const override;

 private:
  std::string name_;
  std::string origin_;
  std::string path_;
  int timeout_seconds_;
};

// Serves a detector with the wire format above. The detector must outlive
// the server.
class DetectorServer {
 public:
  explicit DetectorServer(const Detector& detector, std::string path = "/detect");
  ~DetectorServer();
  DetectorServer(const DetectorServer&) = delete;
  DetectorServer& operator=(const DetectorServer&) = delete;

  // Binds and returns the port; port 0 picks a free one.
  int bind(const std::string& host, int port = 0);
  // Blocks until stop().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tessera

#endif  // TESSERA_ADAPTER_HPP_
