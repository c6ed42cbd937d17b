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

#ifndef TESSERA_EVALUATOR_HPP_
#define TESSERA_EVALUATOR_HPP_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tessera/detector.hpp"
#include "tessera/ingest.hpp"
#include "tessera/transforms.hpp"

namespace tessera {

struct EvalRecord {
  int frame_index = 0;
  double confidence = 0.0;  // 0.0 when no person was detected
  bool detected = false;
  int persons = 0;  // person detections in the frame

  friend bool operator==(const EvalRecord&, const EvalRecord&) = default;
};

struct ConditionResult {
  std::string label;
  double asr_percent = 0.0;
  double mean_conf = 0.0;
  double ci95 = 0.0;
  int n = 0;
  int multi_person_frames = 0;  // frames with more than one person detection
};

struct ScoreOptions {
  int workers = 1;
  // Confidence needed to count a frame as detected; defaults to the
  // detector's detection threshold.
  std::optional<double> asr_threshold;
};

std::vector<EvalRecord> score_frames(const FrameSequence& frames, const Detector& detector,
                                     const DetectorConfig& cfg, const DefenseSpec& defense = {},
                                     const ScoreOptions& options = {});

ConditionResult summarize(std::span<const EvalRecord> records, std::string label = {});

// "frame_index,confidence,detected,persons"; confidences are written with
// enough digits to round-trip exactly.
std::string format_records_csv(std::span<const EvalRecord> records);

// Rows by columns of results, stored row-major.
struct ResultGrid {
  std::vector<std::string> rows;
  std::vector<std::string> columns;
  std::vector<ConditionResult> cells;

  const ConditionResult& at(std::size_t row, std::size_t column) const;
  void validate() const;
};

// One column, one row per condition.
ResultGrid single_column(std::vector<ConditionResult> results, std::string column = "ASR");

// Rows are training models (one frame set per pattern), columns are test
// detectors.
ResultGrid transfer_matrix(std::span<const FrameSequence> frames_per_pattern,
                           std::span<const Detector* const> detectors, const DetectorConfig& cfg,
                           const DefenseSpec& defense = {}, const ScoreOptions& options = {});

enum class ReportStyle { kExp1, kExp2, kDefense, kTransfer, kReplication };

ReportStyle parse_report_style(std::string_view name);
std::string_view report_style_name(ReportStyle style);

// "<asr> (<conf>±<ci>)" with ASR as an integer percent and two decimals.
std::string format_cell(const ConditionResult& result);

struct Report {
  std::string csv;   // label,asr,mean_conf,ci95,n
  std::string text;  // aligned table plus footer
};

Report render_report(const ResultGrid& grid, ReportStyle style);

}  // namespace tessera

#endif  // TESSERA_EVALUATOR_HPP_
