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

#include "tessera/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "tessera/error.hpp"
#include "tessera/parallel.hpp"

namespace tessera {

std::vector<EvalRecord> score_frames(const FrameSequence& frames, const Detector& detector,
                                     const DetectorConfig& cfg, const DefenseSpec& defense,
                                     const ScoreOptions& options) {
  cfg.validate();
  defense.validate();
  if (frames.frames.empty()) fail(ErrorCode::kEmptyRecords, "no frames to score");
  const double threshold = options.asr_threshold.value_or(cfg.detection_threshold);
  std::vector<EvalRecord> records(frames.frames.size());
  parallel_for(frames.frames.size(), options.workers, [&](std::size_t i) {
    std::vector<Detection> detections;
    try {
      detections = detector.detect(fit_to_input(apply_defense(frames.frames[i], defense), cfg), cfg);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kAdapterFailure) throw;
      fail(ErrorCode::kAdapterFailure, fmt::format("frame {}: {}", i, e.what()));
    }
    EvalRecord& r = records[i];
    r.frame_index = static_cast<int>(i);
    r.confidence = max_person_confidence(detections, cfg.person_class_id);
    r.detected = r.confidence >= threshold;
    r.persons = static_cast<int>(count_class(detections, cfg.person_class_id));
  });
  return records;
}

ConditionResult summarize(std::span<const EvalRecord> records, std::string label) {
  if (records.empty()) fail(ErrorCode::kEmptyRecords, "cannot summarize zero records");
  ConditionResult out;
  out.label = std::move(label);
  out.n = static_cast<int>(records.size());
  const double n = static_cast<double>(records.size());
  double missed = 0.0;
  double sum = 0.0;
  for (const auto& r : records) {
    if (!r.detected) missed += 1.0;
    if (r.persons > 1) ++out.multi_person_frames;
    sum += r.confidence;
  }
  out.asr_percent = 100.0 * missed / n;
  out.mean_conf = sum / n;
  if (records.size() > 1) {
    double ss = 0.0;
    for (const auto& r : records) ss += (r.confidence - out.mean_conf) * (r.confidence - out.mean_conf);
    out.ci95 = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return out;
}

std::string format_records_csv(std::span<const EvalRecord> records) {
  std::string out = "frame_index,confidence,detected,persons\n";
  for (const auto& r : records) {
    out += fmt::format("{},{},{},{}\n", r.frame_index, r.confidence, r.detected ? 1 : 0, r.persons);
  }
  return out;
}

const ConditionResult& ResultGrid::at(std::size_t row, std::size_t column) const {
  if (row >= rows.size() || column >= columns.size()) {
    fail(ErrorCode::kInvalidArgument, "result grid index out of range");
  }
  return cells[row * columns.size() + column];
}

void ResultGrid::validate() const {
  if (rows.empty() || columns.empty()) fail(ErrorCode::kEmptyRecords, "empty result grid");
  if (cells.size() != rows.size() * columns.size()) {
    fail(ErrorCode::kDimensionMismatch, "result grid cell count does not match its shape");
  }
}

ResultGrid single_column(std::vector<ConditionResult> results, std::string column) {
  ResultGrid grid;
  grid.columns.push_back(std::move(column));
  for (const auto& r : results) grid.rows.push_back(r.label);
  grid.cells = std::move(results);
  return grid;
}

ResultGrid transfer_matrix(std::span<const FrameSequence> frames_per_pattern,
                           std::span<const Detector* const> detectors, const DetectorConfig& cfg,
                           const DefenseSpec& defense, const ScoreOptions& options) {
  if (frames_per_pattern.empty() || detectors.empty()) {
    fail(ErrorCode::kInvalidArgument, "transfer matrix needs at least one pattern and one detector");
  }
  ResultGrid grid;
  for (const auto& f : frames_per_pattern) grid.rows.push_back(f.label);
  for (const Detector* d : detectors) grid.columns.push_back(d->name());
  for (const auto& frames : frames_per_pattern) {
    for (const Detector* d : detectors) {
      const auto records = score_frames(frames, *d, cfg, defense, options);
      grid.cells.push_back(summarize(records, frames.label + "|" + d->name()));
    }
  }
  return grid;
}

ReportStyle parse_report_style(std::string_view name) {
  if (name == "exp1") return ReportStyle::kExp1;
  if (name == "exp2") return ReportStyle::kExp2;
  if (name == "defense") return ReportStyle::kDefense;
  if (name == "transfer") return ReportStyle::kTransfer;
  if (name == "replication") return ReportStyle::kReplication;
  fail(ErrorCode::kConfigError, "unknown report style '" + std::string(name) + "'");
}

std::string_view report_style_name(ReportStyle style) {
  switch (style) {
    case ReportStyle::kExp1: return "exp1";
    case ReportStyle::kExp2: return "exp2";
    case ReportStyle::kDefense: return "defense";
    case ReportStyle::kTransfer: return "transfer";
    case ReportStyle::kReplication: return "replication";
  }
  return "exp1";
}

std::string format_cell(const ConditionResult& result) {
  return fmt::format("{} ({:.2f}±{:.2f})", std::lround(result.asr_percent), result.mean_conf,
                     result.ci95);
}

namespace {

constexpr std::string_view kCellHeader = "ASR (conf±95%CI)";

struct StyleText {
  std::string_view title;
  std::string_view row_header;
  bool grid;
};

StyleText style_text(ReportStyle style) {
  switch (style) {
    case ReportStyle::kExp1: return {"Patch size results", "Patch type", false};
    case ReportStyle::kExp2: return {"Attack success", "Attack type", false};
    case ReportStyle::kDefense: return {"Robustness to defenses", "Defense type", false};
    case ReportStyle::kTransfer: return {"Attack transfer", "Train model", true};
    case ReportStyle::kReplication: return {"Replicated attack success", "Attack type", true};
  }
  return {"", "", false};
}

// Terminal columns taken by UTF-8 text (one per code point).
std::size_t display_width(std::string_view s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

std::string pad(std::string_view s, std::size_t width) {
  std::string out(s);
  out.append(width - std::min(width, display_width(s)), ' ');
  return out;
}

std::string join_row(const std::vector<std::string>& cells, const std::vector<std::size_t>& widths) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += "  ";
    line += pad(cells[i], widths[i]);
  }
  while (!line.empty() && line.back() == ' ') line.pop_back();
  return line + "\n";
}

}  // namespace

Report render_report(const ResultGrid& grid, ReportStyle style) {
  grid.validate();
  const StyleText text = style_text(style);
  const bool one_column = grid.columns.size() == 1 && !text.grid;

  Report report;
  report.csv = "label,asr,mean_conf,ci95,n\n";
  for (std::size_t r = 0; r < grid.rows.size(); ++r) {
    for (std::size_t c = 0; c < grid.columns.size(); ++c) {
      const auto& cell = grid.at(r, c);
      const std::string label = one_column ? grid.rows[r] : grid.rows[r] + "|" + grid.columns[c];
      report.csv += fmt::format("{},{},{},{},{}\n", label, cell.asr_percent, cell.mean_conf,
                                cell.ci95, cell.n);
    }
  }

  std::vector<std::vector<std::string>> table;
  if (one_column) {
    table.push_back({std::string(text.row_header), std::string(kCellHeader)});
  } else {
    std::vector<std::string> group(grid.columns.size() + 1);
    group[0] = std::string(text.row_header);
    group[1] = style == ReportStyle::kTransfer ? "Test model " + std::string(kCellHeader)
                                               : std::string(kCellHeader);
    table.push_back(std::move(group));
    std::vector<std::string> names{""};
    names.insert(names.end(), grid.columns.begin(), grid.columns.end());
    table.push_back(std::move(names));
  }
  const std::size_t header_rows = table.size();
  for (std::size_t r = 0; r < grid.rows.size(); ++r) {
    std::vector<std::string> line{grid.rows[r]};
    for (std::size_t c = 0; c < grid.columns.size(); ++c) line.push_back(format_cell(grid.at(r, c)));
    table.push_back(std::move(line));
  }
  std::vector<std::size_t> widths(grid.columns.size() + 1, 0);
  for (std::size_t i = 0; i < table.size(); ++i) {
    // The grouped header spans the data columns, so it does not set widths.
    if (!one_column && i == 0) {
      widths[0] = std::max(widths[0], display_width(table[i][0]));
      continue;
    }
    for (std::size_t k = 0; k < table[i].size(); ++k) {
      widths[k] = std::max(widths[k], display_width(table[i][k]));
    }
  }
  std::size_t total = 0;
  for (std::size_t w : widths) total += w;
  total += 2 * (widths.size() - 1);
  total = std::max(total, display_width(join_row(table[0], widths)) - 1);
  const std::string rule(total, '-');

  report.text = std::string(text.title) + "\n" + rule + "\n";
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (i == header_rows) report.text += rule + "\n";
    report.text += join_row(table[i], widths);
  }
  report.text += rule + "\n";
  report.text += "Cells: ASR % (mean confidence ± 95% CI); CI = 1.96 * s / sqrt(n), sample stddev s.\n";
  int multi = 0;
  for (const auto& cell : grid.cells) multi += cell.multi_person_frames;
  if (multi > 0) {
    report.text += fmt::format("Warning: {} frame(s) had more than one person detection; the highest "
                               "confidence was used.\n", multi);
  }
  return report;
}

}  // namespace tessera
