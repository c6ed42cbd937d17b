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

#include "tessera/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "tessera/adapter.hpp"
#include "tessera/detector_training.hpp"
#include "tessera/evaluator.hpp"
#include "tessera/image_io.hpp"
#include "tessera/ingest.hpp"
#include "tessera/json_util.hpp"
#include "tessera/placement.hpp"
#include "tessera/reference_detector.hpp"
#include "tessera/synthetic.hpp"

namespace tessera {

namespace fs = std::filesystem;

nlohmann::json RunConfig::to_json() const {
  nlohmann::json doc = {
      {"name", name},
      {"dataset", dataset},
      {"frames", frames},
      {"detector", detector},
      {"detectors", detectors},
      {"detector_config",
       {{"name", detector_config.name},
        {"person_class_id", detector_config.person_class_id},
        {"detection_threshold", detector_config.detection_threshold},
        {"nms_threshold", detector_config.nms_threshold},
        {"input_size", detector_config.input_size}}},
      {"train", tessera::to_json(train)},
      {"defenses", defenses},
      {"printable", printable},
      {"output", output},
      {"workers", workers},
      {"clothing_labels", clothing_labels},
      {"report_style", report_style},
  };
  doc["asr_threshold"] = asr_threshold ? nlohmann::json(*asr_threshold) : nlohmann::json(nullptr);
  return doc;
}

RunConfig RunConfig::from_json(const nlohmann::json& doc) {
  constexpr std::string_view kCtx = "config";
  require_known_keys(doc,
                     {"name", "dataset", "frames", "detector", "detectors", "detector_config",
                      "train", "defenses", "printable", "output", "workers", "asr_threshold",
                      "clothing_labels", "report_style"},
                     kCtx);
  RunConfig cfg;
  read_optional(doc, "name", cfg.name, kCtx);
  read_optional(doc, "dataset", cfg.dataset, kCtx);
  read_optional(doc, "frames", cfg.frames, kCtx);
  read_optional(doc, "detector", cfg.detector, kCtx);
  read_optional(doc, "detectors", cfg.detectors, kCtx);
  read_optional(doc, "defenses", cfg.defenses, kCtx);
  read_optional(doc, "printable", cfg.printable, kCtx);
  read_optional(doc, "output", cfg.output, kCtx);
  read_optional(doc, "workers", cfg.workers, kCtx);
  read_optional(doc, "clothing_labels", cfg.clothing_labels, kCtx);
  read_optional(doc, "report_style", cfg.report_style, kCtx);
  if (const auto it = doc.find("asr_threshold"); it != doc.end() && !it->is_null()) {
    double v = 0.0;
    read_optional(doc, "asr_threshold", v, kCtx);
    cfg.asr_threshold = v;
  }
  if (const auto it = doc.find("detector_config"); it != doc.end()) {
    constexpr std::string_view kDet = "config.detector_config";
    require_known_keys(*it, {"name", "person_class_id", "detection_threshold", "nms_threshold",
                             "input_size"},
                       kDet);
    read_optional(*it, "name", cfg.detector_config.name, kDet);
    read_optional(*it, "person_class_id", cfg.detector_config.person_class_id, kDet);
    read_optional(*it, "detection_threshold", cfg.detector_config.detection_threshold, kDet);
    read_optional(*it, "nms_threshold", cfg.detector_config.nms_threshold, kDet);
    read_optional(*it, "input_size", cfg.detector_config.input_size, kDet);
  }
  if (const auto it = doc.find("train"); it != doc.end()) cfg.train = train_config_from_json(*it);
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kConfigError, "cannot read config " + path.string());
  try {
    return RunConfig::from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::kConfigError, path.string() + ": " + e.what());
  }
}

std::unique_ptr<Detector> make_detector(const std::string& spec) {
  std::string name;
  std::string body = spec;
  if (const auto eq = spec.find('='); eq != std::string::npos && spec.rfind("http", 0) != 0) {
    name = spec.substr(0, eq);
    body = spec.substr(eq + 1);
  }
  if (body.rfind("http://", 0) == 0) {
    return std::make_unique<HttpDetector>(name.empty() ? body : name, body);
  }
  const auto colon = body.find(':');
  const std::string kind = body.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : body.substr(colon + 1);
  if (kind == "reference") {
    if (arg.empty()) fail(ErrorCode::kConfigError, "reference detector needs a weights path");
    auto detector = ReferenceDetector::load(arg);
    if (name.empty()) return std::make_unique<ReferenceDetector>(std::move(detector));
    return std::make_unique<ReferenceDetector>(detector.architecture(),
                                               std::vector<double>(detector.parameters().begin(),
                                                                   detector.parameters().end()),
                                               name);
  }
  if (kind == "constant") {
    double confidence = 1.0;
    try {
      if (!arg.empty()) confidence = std::stod(arg);
    } catch (const std::exception&) {
      fail(ErrorCode::kConfigError, "bad constant detector confidence '" + arg + "'");
    }
    if (!(confidence >= 0.0 && confidence <= 1.0)) {
      fail(ErrorCode::kConfigError, "constant detector confidence must be in [0,1]");
    }
    return std::make_unique<ConstantDetector>(
        name.empty() ? fmt::format("constant-{}", confidence) : name, confidence);
  }
  fail(ErrorCode::kConfigError, "unknown detector spec '" + spec + "'");
}

fs::path run_directory(const RunConfig& cfg, const std::string& root_override) {
  fs::path root = "runs";
  if (!root_override.empty()) {
    root = root_override;
  } else if (const char* env = std::getenv("PATTERN_RUNS_DIR"); env && *env) {
    root = env;
  } else if (!cfg.output.empty()) {
    root = cfg.output;
  }
  return root / cfg.name;
}

int exit_code_for(Command command, ErrorCode code) {
  if (code == ErrorCode::kConfigError) return kExitData;
  switch (command) {
    case Command::kTrain:
    case Command::kSweep:
      switch (code) {
        case ErrorCode::kNoGradient:
        case ErrorCode::kNoBoxes:
        case ErrorCode::kNoPolygons:
        case ErrorCode::kAdapterFailure:
        case ErrorCode::kEmptyRecords:
          return kExitTraining;
        default:
          return kExitData;
      }
    case Command::kEval:
    case Command::kTransfer:
      return kExitEvaluation;
    default:
      return kExitData;
  }
}

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

nlohmann::json read_json(const fs::path& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
}

std::set<std::string> clothing_labels(const RunConfig& cfg) {
  if (cfg.clothing_labels.empty()) return default_clothing_labels();
  return {cfg.clothing_labels.begin(), cfg.clothing_labels.end()};
}

std::string defense_display_label(const DefenseSpec& spec) {
  switch (spec.kind) {
    case DefenseKind::kNone: return "No defense";
    case DefenseKind::kResize: return fmt::format("{:g}% resize", spec.parameter * 100.0);
    case DefenseKind::kJpeg: return fmt::format("{:g}% quality jpg", spec.parameter);
  }
  return spec.label();
}

std::vector<DefenseSpec> parse_defenses(const std::vector<std::string>& texts) {
  std::vector<DefenseSpec> out;
  for (const auto& t : texts) {
    try {
      out.push_back(DefenseSpec::parse(t));
      out.back().validate();
    } catch (const Error& e) {
      fail(ErrorCode::kConfigError, "defense '" + t + "': " + e.what());
    }
  }
  if (out.empty()) out.emplace_back();
  return out;
}

void validate_config(const RunConfig& cfg) {
  try {
    cfg.train.validate();
    cfg.detector_config.validate();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfigError) throw;
    fail(ErrorCode::kConfigError, e.what());
  }
  if (cfg.workers < 1) fail(ErrorCode::kConfigError, "workers must be >= 1");
  if (cfg.name.empty() || cfg.name.find('/') != std::string::npos) {
    fail(ErrorCode::kConfigError, "run name must be a non-empty single path component");
  }
  parse_defenses(cfg.defenses);
  if (!cfg.report_style.empty()) {
    try {
      parse_report_style(cfg.report_style);
    } catch (const Error& e) {
      fail(ErrorCode::kConfigError, e.what());
    }
  }
}

// Frame sets under `root`: the directory itself when it holds images,
// otherwise each subdirectory in name order.
std::vector<FrameSequence> load_conditions(const fs::path& root, const std::string& label,
                                           int workers) {
  if (!fs::is_directory(root)) fail(ErrorCode::kIoError, "frames directory not found: " + root.string());
  std::vector<fs::path> subdirs;
  bool has_files = false;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) subdirs.push_back(entry.path());
    if (entry.is_regular_file()) has_files = true;
  }
  std::vector<FrameSequence> out;
  if (has_files || subdirs.empty()) {
    const std::string name = label.empty() ? root.filename().string() : label;
    out.push_back(load_frame_dir(root, name, workers));
    return out;
  }
  std::sort(subdirs.begin(), subdirs.end());
  for (const auto& dir : subdirs) out.push_back(load_frame_dir(dir, dir.filename().string(), workers));
  return out;
}

// Options shared by the config-driven subcommands.
struct CommonOptions {
  std::string config_path;
  std::string manifest_path;
  std::string name;
  std::string output_root;
  std::string detector;
  int workers = 0;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "JSON run config")->check(CLI::ExistingFile);
  cmd->add_option("--from-manifest", o.manifest_path, "rerun from a manifest.json")
      ->check(CLI::ExistingFile);
  cmd->add_option("--name", o.name, "run name");
  cmd->add_option("--output", o.output_root, "runs root directory");
  cmd->add_option("--detector", o.detector, "detector spec");
  cmd->add_option("--workers", o.workers, "parallel workers")->check(CLI::PositiveNumber);
}

RunConfig resolve_config(const CommonOptions& o) {
  RunConfig cfg;
  if (!o.manifest_path.empty()) {
    const auto manifest = read_json(o.manifest_path);
    if (!manifest.contains("run_config")) {
      fail(ErrorCode::kConfigError, o.manifest_path + " has no run_config");
    }
    cfg = RunConfig::from_json(manifest.at("run_config"));
  } else if (!o.config_path.empty()) {
    cfg = load_run_config(o.config_path);
  }
  if (!o.name.empty()) cfg.name = o.name;
  if (!o.detector.empty()) cfg.detector = o.detector;
  if (o.workers > 0) cfg.workers = o.workers;
  return cfg;
}

nlohmann::json manifest_header(std::string_view command, const RunConfig& cfg) {
  return {{"schema", 1},
          {"command", command},
          {"code_version", code_version()},
          {"codec_version", codec_version()},
          {"run_config", cfg.to_json()}};
}

int cmd_ingest(const std::string& input, std::string dest, int hash_bits, int max_distance,
               const CommonOptions& common, std::ostream& out) {
  RunConfig cfg = resolve_config(common);
  validate_config(cfg);
  const std::string source = input.empty() ? cfg.dataset : input;
  if (source.empty()) fail(ErrorCode::kConfigError, "ingest needs --input or config.dataset");
  auto samples = load_dataset(source, clothing_labels(cfg), cfg.workers);
  const std::size_t loaded = samples.size();
  samples = deduplicate(std::move(samples), hash_bits, max_distance);
  std::size_t boxes = 0;
  std::size_t polygons = 0;
  nlohmann::json index = nlohmann::json::array();
  for (const auto& s : samples) {
    boxes += s.boxes.size();
    polygons += s.polygons.size();
    index.push_back({{"stem", fs::path(s.source_path).stem().string()},
                     {"width", s.image.width()},
                     {"height", s.image.height()},
                     {"boxes", s.boxes.size()},
                     {"polygons", s.polygons.size()}});
  }
  const fs::path target = dest.empty() ? run_directory(cfg, common.output_root) / "dataset" : fs::path(dest);
  write_dataset(target, samples);
  write_file(target / "index.json", nlohmann::json{{"loaded", loaded},
                                                   {"kept", samples.size()},
                                                   {"boxes", boxes},
                                                   {"polygons", polygons},
                                                   {"samples", index}}
                                        .dump(2));
  out << fmt::format("loaded {}, removed {} duplicates, kept {}; {} boxes, {} polygons -> {}\n",
                     loaded, loaded - samples.size(), samples.size(), boxes, polygons,
                     target.string());
  return kExitOk;
}

struct TrainFlags {
  std::string dataset;
  std::string mode;
  std::optional<int> steps;
  std::optional<std::uint64_t> seed;
  std::optional<double> step_size;
  std::optional<int> batch;
  std::string optimizer;
  std::optional<double> element_fraction;
  std::optional<double> scale_fraction;
  int log_every = 0;
};

int cmd_train(const TrainFlags& flags, const CommonOptions& common, std::ostream& out) {
  RunConfig cfg = resolve_config(common);
  if (!flags.dataset.empty()) cfg.dataset = flags.dataset;
  try {
    if (!flags.mode.empty()) cfg.train.mode = parse_attack_mode(flags.mode);
    if (!flags.optimizer.empty()) cfg.train.optimizer = parse_optimizer(flags.optimizer);
  } catch (const Error& e) {
    fail(ErrorCode::kConfigError, e.what());
  }
  if (flags.steps) cfg.train.steps = *flags.steps;
  if (flags.seed) cfg.train.seed = *flags.seed;
  if (flags.step_size) cfg.train.step_size = *flags.step_size;
  if (flags.batch) cfg.train.batch = *flags.batch;
  if (flags.element_fraction) cfg.train.element_fraction = *flags.element_fraction;
  if (flags.scale_fraction) cfg.train.scale_fraction = *flags.scale_fraction;
  validate_config(cfg);
  if (cfg.dataset.empty()) fail(ErrorCode::kConfigError, "train needs --dataset or config.dataset");

  const auto detector = make_detector(cfg.detector);
  const auto samples = load_dataset(cfg.dataset, clothing_labels(cfg), cfg.workers);
  const auto printable = PrintableSet::load_csv(cfg.printable);
  const int every = flags.log_every > 0 ? flags.log_every : std::max(1, cfg.train.steps / 10);
  const auto result = train(samples, *detector, cfg.detector_config, cfg.train, printable,
                            [&](int step, double loss) {
                              if (step % every == 0) out << fmt::format("step {} loss {:.6f}\n", step, loss);
                            });

  const fs::path dir = run_directory(cfg, common.output_root);
  fs::create_directories(dir);
  write_png(result.element.pixels(), dir / "element.png");
  const auto config_doc = tessera::to_json(cfg.train);
  write_file(dir / "element.json",
             nlohmann::json{{"side_px", result.element.side()},
                            {"mode", attack_mode_name(cfg.train.mode)},
                            {"element_fraction", cfg.train.element_fraction},
                            {"scale_fraction", cfg.train.scale_fraction},
                            {"config_hash", config_hash(config_doc)}}
                 .dump(2));
  auto manifest = manifest_header("train", cfg);
  manifest["training"] = result.manifest.to_json();
  write_file(dir / "manifest.json", manifest.dump(2));
  const auto& trace = result.manifest.loss_trace;
  out << fmt::format("trained {} element {}x{} in {} steps", attack_mode_name(cfg.train.mode),
                     result.element.side(), result.element.side(), cfg.train.steps);
  if (!trace.empty()) out << fmt::format(", loss {:.6f} -> {:.6f}", trace.front(), trace.back());
  out << fmt::format("\nwrote {}\n", dir.string());
  return kExitOk;
}

ReportStyle style_or(const RunConfig& cfg, const std::string& flag, ReportStyle fallback) {
  const std::string& name = !flag.empty() ? flag : cfg.report_style;
  if (name.empty()) return fallback;
  try {
    return parse_report_style(name);
  } catch (const Error& e) {
    fail(ErrorCode::kConfigError, e.what());
  }
}

void write_report(const fs::path& dir, const Report& report, const std::string& records,
                  const nlohmann::json& manifest, std::ostream& out) {
  fs::create_directories(dir);
  write_file(dir / "records.csv", records);
  write_file(dir / "results.csv", report.csv);
  write_file(dir / "report.txt", report.text);
  write_file(dir / "manifest.json", manifest.dump(2));
  out << report.text << fmt::format("wrote {}\n", dir.string());
}

std::string record_lines(std::string_view row, std::string_view column,
                         std::span<const EvalRecord> records) {
  std::string text;
  for (const auto& r : records) {
    text += fmt::format("{},{},{},{},{},{}\n", row, column, r.frame_index, r.confidence,
                        r.detected ? 1 : 0, r.persons);
  }
  return text;
}

int cmd_eval(const std::string& frames_flag, const std::string& label,
             const std::vector<std::string>& defense_flags, const std::string& style_flag,
             std::optional<double> asr_threshold, const CommonOptions& common, std::ostream& out) {
  RunConfig cfg = resolve_config(common);
  if (!frames_flag.empty()) cfg.frames = frames_flag;
  if (!defense_flags.empty()) cfg.defenses = defense_flags;
  if (asr_threshold) cfg.asr_threshold = asr_threshold;
  validate_config(cfg);
  if (cfg.frames.empty()) fail(ErrorCode::kConfigError, "eval needs --frames or config.frames");
  const auto defenses = parse_defenses(cfg.defenses);
  const auto detector = make_detector(cfg.detector);
  const auto conditions = load_conditions(cfg.frames, label, cfg.workers);
  const ScoreOptions options{cfg.workers, cfg.asr_threshold};

  ResultGrid grid;
  ReportStyle fallback = ReportStyle::kExp2;
  std::string records = "condition,defense,frame_index,confidence,detected,persons\n";
  std::vector<ConditionResult> cells;
  for (const auto& condition : conditions) {
    for (const auto& defense : defenses) {
      const auto recs = score_frames(condition, *detector, cfg.detector_config, defense, options);
      records += record_lines(condition.label, defense.label(), recs);
      cells.push_back(summarize(recs, condition.label));
    }
  }
  if (defenses.size() == 1) {
    grid = single_column(std::move(cells), defense_display_label(defenses[0]));
  } else if (conditions.size() == 1) {
    for (std::size_t d = 0; d < defenses.size(); ++d) cells[d].label = defense_display_label(defenses[d]);
    grid = single_column(std::move(cells), conditions[0].label);
    fallback = ReportStyle::kDefense;
  } else {
    for (const auto& c : conditions) grid.rows.push_back(c.label);
    for (const auto& d : defenses) grid.columns.push_back(defense_display_label(d));
    grid.cells = std::move(cells);
    fallback = ReportStyle::kReplication;
  }
  const Report report = render_report(grid, style_or(cfg, style_flag, fallback));
  auto manifest = manifest_header("eval", cfg);
  manifest["detector_name"] = detector->name();
  write_report(run_directory(cfg, common.output_root), report, records, manifest, out);
  return kExitOk;
}

int cmd_transfer(const std::string& frames_flag, const std::vector<std::string>& detector_flags,
                 const std::string& defense_flag, const CommonOptions& common, std::ostream& out) {
  RunConfig cfg = resolve_config(common);
  if (!frames_flag.empty()) cfg.frames = frames_flag;
  if (!detector_flags.empty()) cfg.detectors = detector_flags;
  if (!defense_flag.empty()) cfg.defenses = {defense_flag};
  validate_config(cfg);
  if (cfg.frames.empty()) fail(ErrorCode::kConfigError, "transfer needs --frames or config.frames");
  if (cfg.detectors.empty()) cfg.detectors = {cfg.detector};
  const DefenseSpec defense = parse_defenses(cfg.defenses).front();
  std::vector<std::unique_ptr<Detector>> owned;
  std::vector<const Detector*> detectors;
  for (const auto& spec : cfg.detectors) {
    owned.push_back(make_detector(spec));
    detectors.push_back(owned.back().get());
  }
  const auto patterns = load_conditions(cfg.frames, {}, cfg.workers);
  const ScoreOptions options{cfg.workers, cfg.asr_threshold};

  ResultGrid grid;
  std::string records = "train,test,frame_index,confidence,detected,persons\n";
  for (const auto& p : patterns) grid.rows.push_back(p.label);
  for (const auto* d : detectors) grid.columns.push_back(d->name());
  for (const auto& p : patterns) {
    for (const auto* d : detectors) {
      const auto recs = score_frames(p, *d, cfg.detector_config, defense, options);
      records += record_lines(p.label, d->name(), recs);
      grid.cells.push_back(summarize(recs, p.label + "|" + d->name()));
    }
  }
  const Report report = render_report(grid, style_or(cfg, {}, ReportStyle::kTransfer));
  write_report(run_directory(cfg, common.output_root), report, records,
               manifest_header("transfer", cfg), out);
  return kExitOk;
}

int cmd_sweep(const std::string& element_path, std::vector<double> fractions, int min_side,
              const std::string& dataset_flag, const CommonOptions& common, std::ostream& out) {
  RunConfig cfg = resolve_config(common);
  if (!dataset_flag.empty()) cfg.dataset = dataset_flag;
  validate_config(cfg);
  if (cfg.dataset.empty()) fail(ErrorCode::kConfigError, "sweep needs --dataset or config.dataset");
  if (fractions.empty()) fractions = {0.02, 0.03, 0.05, 0.08, 0.10, 0.15, 0.20};
  const PatchElement element(read_image(element_path));
  const auto detector = make_detector(cfg.detector);
  const auto samples = load_dataset(cfg.dataset, clothing_labels(cfg), cfg.workers);
  const auto result = sweep_element_size(element, samples, *detector, cfg.detector_config,
                                         fractions, min_side);
  std::string csv = "fraction,element_side,mean_confidence\n";
  for (const auto& row : result.table) {
    csv += fmt::format("{},{},{}\n", row.fraction, row.element_side, row.mean_confidence);
    out << fmt::format("fraction {:<6g} side {:>3}  mean confidence {:.4f}\n", row.fraction,
                       row.element_side, row.mean_confidence);
  }
  out << fmt::format("best fraction {:g}\n", result.best_fraction);
  const fs::path dir = run_directory(cfg, common.output_root);
  fs::create_directories(dir);
  write_file(dir / "sweep.csv", csv);
  return kExitOk;
}

// Reads a results CSV back into a grid; "row|column" labels make a matrix.
ResultGrid parse_results_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("label,asr,mean_conf,ci95,n", 0) != 0) {
    fail(ErrorCode::kParseError, "results CSV must start with label,asr,mean_conf,ci95,n");
  }
  std::vector<std::pair<std::string, std::string>> keys;
  std::vector<ConditionResult> cells;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != 5) fail(ErrorCode::kParseError, fmt::format("results line {}: expected 5 fields", line_no));
    ConditionResult r;
    r.label = fields[0];
    try {
      r.asr_percent = std::stod(fields[1]);
      r.mean_conf = std::stod(fields[2]);
      r.ci95 = std::stod(fields[3]);
      r.n = std::stoi(fields[4]);
    } catch (const std::exception&) {
      fail(ErrorCode::kParseError, fmt::format("results line {}: bad number", line_no));
    }
    const auto bar = r.label.find('|');
    keys.emplace_back(r.label.substr(0, bar), bar == std::string::npos ? "" : r.label.substr(bar + 1));
    cells.push_back(r);
  }
  if (cells.empty()) fail(ErrorCode::kEmptyRecords, "results CSV has no rows");
  const bool matrix = std::any_of(keys.begin(), keys.end(), [](const auto& k) { return !k.second.empty(); });
  if (!matrix) return single_column(std::move(cells));
  ResultGrid grid;
  for (const auto& [row, column] : keys) {
    if (std::find(grid.rows.begin(), grid.rows.end(), row) == grid.rows.end()) grid.rows.push_back(row);
    if (std::find(grid.columns.begin(), grid.columns.end(), column) == grid.columns.end()) {
      grid.columns.push_back(column);
    }
  }
  grid.cells.resize(grid.rows.size() * grid.columns.size());
  std::vector<bool> filled(grid.cells.size(), false);
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const auto r = std::find(grid.rows.begin(), grid.rows.end(), keys[i].first) - grid.rows.begin();
    const auto c = std::find(grid.columns.begin(), grid.columns.end(), keys[i].second) - grid.columns.begin();
    const std::size_t k = static_cast<std::size_t>(r) * grid.columns.size() + static_cast<std::size_t>(c);
    grid.cells[k] = cells[i];
    filled[k] = true;
  }
  if (std::find(filled.begin(), filled.end(), false) != filled.end()) {
    fail(ErrorCode::kParseError, "results CSV does not fill a complete rows x columns grid");
  }
  return grid;
}

int cmd_report(const std::string& results, const std::string& style, const std::string& dest,
               std::ostream& out) {
  ReportStyle s = ReportStyle::kExp2;
  if (!style.empty()) {
    try {
      s = parse_report_style(style);
    } catch (const Error& e) {
      fail(ErrorCode::kConfigError, e.what());
    }
  }
  const ResultGrid grid = parse_results_csv(read_file(results));
  const Report report = render_report(grid, s);
  if (!dest.empty()) write_file(dest, report.text);
  out << report.text;
  return kExitOk;
}

int cmd_fit_detector(const std::string& dest, int steps, std::uint64_t seed, int width,
                     const std::string& name, std::ostream& out) {
  DetectorTrainingConfig cfg;
  cfg.steps = steps;
  cfg.seed = seed;
  const auto arch = ReferenceArchitecture::standard(width);
  const int every = std::max(1, steps / 10);
  const auto detector = train_reference_detector(arch, cfg, name, [&](int step, double loss) {
    if (step % every == 0) out << fmt::format("step {} loss {:.4f}\n", step, loss);
  });
  DetectorConfig dc;
  dc.input_size = arch.input_size;
  const auto recall = measure_person_recall(detector, dc, cfg.scenes, 999000, 400);
  detector.save(dest);
  out << fmt::format("person recall {:.4f} on {} held-out scenes; wrote {}\n", recall.recall(),
                     recall.scenes, dest);
  return kExitOk;
}

int cmd_make_fixtures(const std::string& dest, int count, std::uint64_t seed, int duplicates,
                      std::ostream& out) {
  if (count < 1) fail(ErrorCode::kConfigError, "--count must be >= 1");
  if (duplicates < 0 || duplicates > count) {
    fail(ErrorCode::kConfigError, "--duplicates must be in [0, count]");
  }
  const SceneConfig scenes;
  std::vector<DatasetSample> samples;
  for (int i = 0; i < count; ++i) {
    Scene s = generate_person_scene(scenes, seed + static_cast<std::uint64_t>(i));
    samples.push_back({std::move(s.image), std::move(s.boxes), std::move(s.polygons),
                       fmt::format("scene_{:04d}.png", i)});
  }
  // Duplicates are 2x nearest-neighbour enlargements of the first scenes,
  // so deduplication should keep the enlarged copy.
  for (int i = 0; i < duplicates; ++i) {
    const auto& src = samples[static_cast<std::size_t>(i)];
    ImageBuffer big(src.image.height() * 2, src.image.width() * 2, src.image.channels());
    for (int y = 0; y < big.height(); ++y) {
      for (int x = 0; x < big.width(); ++x) {
        for (int c = 0; c < big.channels(); ++c) big.at(y, x, c) = src.image.at(y / 2, x / 2, c);
      }
    }
    std::vector<ClothingPolygon> polys = src.polygons;
    for (auto& p : polys) {
      for (auto& v : p.vertices) v = {v.x * 2.0, v.y * 2.0};
    }
    samples.push_back({std::move(big), src.boxes, std::move(polys), fmt::format("dup_{:04d}.png", i)});
  }
  write_dataset(dest, samples);
  out << fmt::format("wrote {} samples ({} duplicates) to {}\n", samples.size(), duplicates, dest);
  return kExitOk;
}

struct RenderFlags {
  std::string dataset;
  std::string dest;
  std::string attack = "none";
  std::string element;
  double scale = 0.30;
  double element_fraction = 0.0;
  int side = 0;
  int person_class_id = 0;
};

int cmd_render_frames(const RenderFlags& f, std::ostream& out) {
  const auto samples = load_dataset(f.dataset, default_clothing_labels(), 1);
  const bool is_patch = f.attack == "patch" || f.attack == "checkerboard";
  if (!is_patch && f.attack != "pattern" && f.attack != "none") {
    fail(ErrorCode::kConfigError, "--attack must be none, checkerboard, patch or pattern");
  }
  std::optional<PatchElement> element;
  if (f.attack == "patch" || f.attack == "pattern") {
    if (f.element.empty()) fail(ErrorCode::kConfigError, "--element is required for " + f.attack);
    element.emplace(read_image(f.element));
  }
  PlacementConfig placement;
  placement.scale_fraction = f.scale;
  placement.validate();
  double mean_side = 0.0;
  if (f.attack != "none") mean_side = mean_bbox_side(samples, f.person_class_id);
  if (f.attack == "checkerboard") {
    const int side = f.side > 0 ? f.side
                                : std::max(8, static_cast<int>(std::lround(
                                                  paste_side_for_box(mean_side, mean_side, placement))));
    element.emplace(checkerboard(side, side, std::max(1, side / 4)));
  }
  if (f.attack == "pattern" && f.element_fraction > 0.0) {
    element = rescale_element(*element, element_side_for(f.element_fraction, mean_side, 2));
  }
  std::vector<ImageBuffer> frames;
  for (const auto& s : samples) {
    ImageBuffer img = s.image;
    if (is_patch) {
      for (const auto& b : s.boxes) {
        if (b.class_id != f.person_class_id) continue;
        img = PatchPaste(element->side(), b, img.height(), img.width(), placement).apply(img, *element);
      }
    } else if (f.attack == "pattern") {
      img = apply_masked_pattern(img, *element, clothing_mask(s));
    }
    frames.push_back(std::move(img));
  }
  write_frame_dir(f.dest, frames);
  out << fmt::format("rendered {} {} frames to {}\n", frames.size(), f.attack, f.dest);
  return kExitOk;
}

int cmd_serve(const std::string& spec, const std::string& host, int port, std::ostream& out) {
  const auto detector = make_detector(spec);
  DetectorServer server(*detector);
  const int bound = server.bind(host, port);
  out << fmt::format("serving {} on http://{}:{}/detect\n", detector->name(), host, bound) << std::flush;
  server.listen();
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Repeatable-element adversarial patterns against object detectors", "tessera"};
  app.require_subcommand(1);
  app.set_version_flag("--version", code_version());

  CommonOptions common;
  Command command = Command::kOther;
  std::function<int()> action;

  auto* ingest = app.add_subcommand("ingest", "load, validate and deduplicate a dataset");
  std::string ingest_input, ingest_dest;
  int hash_bits = 64, max_distance = 0;
  add_common(ingest, common);
  ingest->add_option("--input", ingest_input, "dataset root with images/, labels/, polygons/");
  ingest->add_option("--dest", ingest_dest, "where to write the normalized dataset");
  ingest->add_option("--hash-bits", hash_bits, "perceptual hash size (square number)");
  ingest->add_option("--max-distance", max_distance, "Hamming distance counted as duplicate");
  ingest->callback([&] {
    command = Command::kIngest;
    action = [&] { return cmd_ingest(ingest_input, ingest_dest, hash_bits, max_distance, common, out); };
  });

  auto* train_cmd = app.add_subcommand("train", "optimize a patch or tiled pattern");
  TrainFlags tf;
  add_common(train_cmd, common);
  train_cmd->add_option("--dataset", tf.dataset, "training dataset root");
  train_cmd->add_option("--mode", tf.mode, "patch or pattern");
  train_cmd->add_option("--steps", tf.steps, "optimization steps (0 writes the initialization)");
  train_cmd->add_option("--seed", tf.seed, "random seed");
  train_cmd->add_option("--step-size", tf.step_size, "initial step size");
  train_cmd->add_option("--batch", tf.batch, "images per step");
  train_cmd->add_option("--optimizer", tf.optimizer, "sgd or adam");
  train_cmd->add_option("--element-fraction", tf.element_fraction, "pattern element side / mean box side");
  train_cmd->add_option("--scale-fraction", tf.scale_fraction, "patch size relative to each box");
  train_cmd->add_option("--log-every", tf.log_every, "print the loss every N steps");
  train_cmd->callback([&] {
    command = Command::kTrain;
    action = [&] { return cmd_train(tf, common, out); };
  });

  auto* eval = app.add_subcommand("eval", "score frames under each defense");
  std::string eval_frames, eval_label, eval_style;
  std::vector<std::string> eval_defenses;
  std::optional<double> eval_asr;
  add_common(eval, common);
  eval->add_option("--frames", eval_frames, "frame directory, or a directory of condition directories");
  eval->add_option("--label", eval_label, "condition label for a single frame directory");
  eval->add_option("--defense", eval_defenses, "none, resize:<f> or jpeg:<q> (repeatable)");
  eval->add_option("--style", eval_style, "report style: exp1, exp2, defense, transfer, replication");
  eval->add_option("--asr-threshold", eval_asr, "confidence that counts as detected");
  eval->callback([&] {
    command = Command::kEval;
    action = [&] { return cmd_eval(eval_frames, eval_label, eval_defenses, eval_style, eval_asr, common, out); };
  });

  auto* sweep = app.add_subcommand("sweep", "pick the deployed element size");
  std::string sweep_element, sweep_dataset;
  std::vector<double> sweep_fractions;
  int sweep_min_side = 2;
  add_common(sweep, common);
  sweep->add_option("--element", sweep_element, "trained element PNG")->required()->check(CLI::ExistingFile);
  sweep->add_option("--dataset", sweep_dataset, "dataset root");
  sweep->add_option("--fractions", sweep_fractions, "candidate fractions of the mean box side")->delimiter(',');
  sweep->add_option("--min-side", sweep_min_side, "smallest element side in pixels");
  sweep->callback([&] {
    command = Command::kSweep;
    action = [&] { return cmd_sweep(sweep_element, sweep_fractions, sweep_min_side, sweep_dataset, common, out); };
  });

  auto* transfer = app.add_subcommand("transfer", "score pattern frame sets against several detectors");
  std::string transfer_frames, transfer_defense;
  std::vector<std::string> transfer_detectors;
  add_common(transfer, common);
  transfer->add_option("--frames", transfer_frames, "directory with one frame directory per pattern");
  transfer->add_option("--test-detector", transfer_detectors, "detector spec per column (repeatable)");
  transfer->add_option("--defense", transfer_defense, "defense applied to every cell");
  transfer->callback([&] {
    command = Command::kTransfer;
    action = [&] { return cmd_transfer(transfer_frames, transfer_detectors, transfer_defense, common, out); };
  });

  auto* report = app.add_subcommand("report", "render a results CSV as a table");
  std::string report_results, report_style, report_dest;
  report->add_option("--results", report_results, "results.csv")->required()->check(CLI::ExistingFile);
  report->add_option("--style", report_style, "exp1, exp2, defense, transfer, replication");
  report->add_option("--dest", report_dest, "also write the table here");
  report->callback([&] {
    command = Command::kReport;
    action = [&] { return cmd_report(report_results, report_style, report_dest, out); };
  });

  auto* fit = app.add_subcommand("fit-detector", "train the reference detector on synthetic scenes");
  std::string fit_dest, fit_name = "reference";
  int fit_steps = 8000, fit_width = 1;
  std::uint64_t fit_seed = 7;
  fit->add_option("--dest", fit_dest, "weights JSON to write")->required();
  fit->add_option("--steps", fit_steps, "training steps");
  fit->add_option("--seed", fit_seed, "seed");
  fit->add_option("--width", fit_width, "channel width multiplier");
  fit->add_option("--name", fit_name, "detector name stored in the weights");
  fit->callback([&] {
    action = [&] { return cmd_fit_detector(fit_dest, fit_steps, fit_seed, fit_width, fit_name, out); };
  });

  auto* fixtures = app.add_subcommand("make-fixtures", "write a synthetic person dataset");
  std::string fixtures_dest;
  int fixtures_count = 64, fixtures_dups = 0;
  std::uint64_t fixtures_seed = 1;
  fixtures->add_option("--dest", fixtures_dest, "dataset root to write")->required();
  fixtures->add_option("--count", fixtures_count, "number of scenes");
  fixtures->add_option("--seed", fixtures_seed, "first scene seed");
  fixtures->add_option("--duplicates", fixtures_dups, "enlarged copies of the first scenes to add");
  fixtures->callback([&] {
    action = [&] { return cmd_make_fixtures(fixtures_dest, fixtures_count, fixtures_seed, fixtures_dups, out); };
  });

  auto* render = app.add_subcommand("render-frames", "composite an attack onto dataset images");
  RenderFlags rf;
  render->add_option("--dataset", rf.dataset, "dataset root")->required();
  render->add_option("--dest", rf.dest, "frame directory to write")->required();
  render->add_option("--attack", rf.attack, "none, checkerboard, patch or pattern");
  render->add_option("--element", rf.element, "element PNG for patch or pattern");
  render->add_option("--scale", rf.scale, "patch area fraction of each person box");
  render->add_option("--element-fraction", rf.element_fraction, "deployed pattern element side / mean box side");
  render->add_option("--side", rf.side, "checkerboard side in pixels");
  render->callback([&] { action = [&] { return cmd_render_frames(rf, out); }; });

  auto* serve = app.add_subcommand("serve", "expose a detector over HTTP");
  std::string serve_spec, serve_host = "127.0.0.1";
  int serve_port = 8080;
  serve->add_option("--detector", serve_spec, "detector spec")->required();
  serve->add_option("--host", serve_host, "bind address");
  serve->add_option("--port", serve_port, "port (0 picks one)");
  serve->callback([&] { action = [&] { return cmd_serve(serve_spec, serve_host, serve_port, out); }; });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << code_version() << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  try {
    return action();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(command, e.code());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return command == Command::kEval || command == Command::kTransfer ? kExitEvaluation : kExitData;
  }
}

}  // namespace tessera
