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

#include "tessera/adapter.hpp"

#include <regex>

#include <httplib.h>

#include "tessera/error.hpp"
#include "tessera/image_io.hpp"

namespace tessera {

nlohmann::json detector_config_to_json(const DetectorConfig& cfg) {
  return {{"schema", kAdapterSchema},
          {"name", cfg.name},
          {"person_class_id", cfg.person_class_id},
          {"detection_threshold", cfg.detection_threshold},
          {"nms_threshold", cfg.nms_threshold},
          {"input_size", cfg.input_size}};
}

DetectorConfig detector_config_from_json(const nlohmann::json& doc) {
  try {
    DetectorConfig cfg;
    cfg.name = doc.value("name", cfg.name);
    cfg.person_class_id = doc.value("person_class_id", cfg.person_class_id);
    cfg.detection_threshold = doc.value("detection_threshold", cfg.detection_threshold);
    cfg.nms_threshold = doc.value("nms_threshold", cfg.nms_threshold);
    cfg.input_size = doc.value("input_size", cfg.input_size);
    cfg.validate();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kAdapterFailure, std::string("detector config: ") + e.what());
  }
}

nlohmann::json detections_to_json(std::span<const Detection> detections) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& d : detections) {
    list.push_back({{"bbox", {d.box.cx, d.box.cy, d.box.w, d.box.h}},
                    {"class_id", d.class_id},
                    {"confidence", d.confidence}});
  }
  return {{"schema", kAdapterSchema}, {"detections", std::move(list)}};
}

std::vector<Detection> detections_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("schema").get<int>() != kAdapterSchema) {
      fail(ErrorCode::kAdapterFailure, "unsupported adapter schema " + doc.at("schema").dump());
    }
    std::vector<Detection> out;
    for (const auto& item : doc.at("detections")) {
      const auto bbox = item.at("bbox").get<std::vector<double>>();
      if (bbox.size() != 4) fail(ErrorCode::kAdapterFailure, "bbox must have 4 values");
      Detection d;
      d.class_id = item.at("class_id").get<int>();
      d.box = {bbox[0], bbox[1], bbox[2], bbox[3], d.class_id};
      d.confidence = item.at("confidence").get<double>();
      if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
        fail(ErrorCode::kAdapterFailure, "confidence outside [0,1]");
      }
      out.push_back(d);
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kAdapterFailure, std::string("malformed detector response: ") + e.what());
  }
}

HttpDetector::HttpDetector(std::string name, std::string url, int timeout_seconds)
    : name_(std::move(name)), timeout_seconds_(timeout_seconds) {
  static const std::regex kUrl(R"(^(http://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) {
    fail(ErrorCode::kConfigError, "detector url must look like http://host:port/path, got " + url);
  }
  origin_ = m[1].str();
  path_ = m[2].matched ? m[2].str() : "/detect";
}

std::vector<Detection> HttpDetector::detect(const ImageBuffer& image,
                                            const DetectorConfig& cfg) const {
  httplib::Client client(origin_);
  client.set_connection_timeout(timeout_seconds_);
  client.set_read_timeout(timeout_seconds_);
  const auto png = encode_png(image);
  const httplib::MultipartFormDataItems items = {
      {"image", std::string(png.begin(), png.end()), "frame.png", "image/png"},
      {"config", detector_config_to_json(cfg).dump(), "", "application/json"},
  };
  const auto res = client.Post(path_, items);
  if (!res) {
    fail(ErrorCode::kAdapterFailure,
         "detector '" + name_ + "' unreachable at " + origin_ + ": " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    fail(ErrorCode::kAdapterFailure, "detector '" + name_ + "' returned HTTP " +
                                         std::to_string(res->status) + ": " + res->body);
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kAdapterFailure, std::string("detector response is not JSON: ") + e.what());
  }
  auto detections = detections_from_json(doc);
  std::erase_if(detections, [&](const Detection& d) { return d.confidence < cfg.detection_threshold; });
  return detections;
}

struct DetectorServer::Impl {
  explicit Impl(const Detector& d) : detector(d) {}
  const Detector& detector;
  httplib::Server server;
};

DetectorServer::DetectorServer(const Detector& detector, std::string path)
    : impl_(std::make_unique<Impl>(detector)) {
  impl_->server.Post(path, [this](const httplib::Request& req, httplib::Response& res) {
    try {
      if (!req.has_file("image") || !req.has_file("config")) {
        fail(ErrorCode::kAdapterFailure, "request needs 'image' and 'config' parts");
      }
      const auto image_part = req.get_file_value("image").content;
      const ImageBuffer image =
          decode_image(std::vector<std::uint8_t>(image_part.begin(), image_part.end()));
      const DetectorConfig cfg =
          detector_config_from_json(nlohmann::json::parse(req.get_file_value("config").content));
      const auto detections = impl_->detector.detect(fit_to_input(image, cfg), cfg);
      res.set_content(detections_to_json(detections).dump(), "application/json");
    } catch (const std::exception& e) {
      res.status = 400;
      res.set_content(e.what(), "text/plain");
    }
  });
}

DetectorServer::~DetectorServer() { stop(); }

int DetectorServer::bind(const std::string& host, int port) {
  if (port == 0) {
    port = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    port = -1;
  }
  if (port < 0) fail(ErrorCode::kIoError, "cannot bind detector server on " + host);
  return port;
}

void DetectorServer::listen() { impl_->server.listen_after_bind(); }

void DetectorServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace tessera
