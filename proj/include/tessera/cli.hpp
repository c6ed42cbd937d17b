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

#ifndef TESSERA_CLI_HPP_
#define TESSERA_CLI_HPP_

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tessera/detector.hpp"
#include "tessera/error.hpp"
#include "tessera/trainer.hpp"
#include "tessera/transforms.hpp"

namespace tessera {

inline constexpr int kExitOk = 0;
inline constexpr int kExitData = 2;
inline constexpr int kExitTraining = 3;
inline constexpr int kExitEvaluation = 4;

// The JSON document behind --config. Every key is optional; unknown keys are
// rejected before anything touches the filesystem.
struct RunConfig {
  std::string name = "run";
  std::string dataset;    // training / sweep dataset root
  std::string frames;     // evaluation frames: one frame dir or a dir of them
  std::string detector = "reference:data/reference_detector.json";
  std::vector<std::string> detectors;  // transfer columns
  DetectorConfig detector_config;
  TrainConfig train;
  std::vector<std::string> defenses{"none"};
  std::string printable = "data/printable_colors.csv";
  std::string output;  // runs root; PATTERN_RUNS_DIR and --output take precedence
  int workers = 1;
  std::optional<double> asr_threshold;
  std::vector<std::string> clothing_labels;
  std::string report_style;

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& doc);
};

RunConfig load_run_config(const std::filesystem::path& path);

// "reference:<weights.json>", "constant:<confidence>" or an http:// URL,
// optionally prefixed by "<name>=".
std::unique_ptr<Detector> make_detector(const std::string& spec);

// Resolves <root>/<name> with root = override, else $PATTERN_RUNS_DIR, else
// cfg.output, else "runs".
std::filesystem::path run_directory(const RunConfig& cfg, const std::string& root_override = {});

enum class Command { kIngest, kTrain, kEval, kSweep, kTransfer, kReport, kOther };

// Exit code for an error raised while running a command.
int exit_code_for(Command command, ErrorCode code);

// Entry point behind the tessera executable; args exclude the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tessera

#endif  // TESSERA_CLI_HPP_
