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


#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tessera/cli.hpp"
#include "tessera/image_io.hpp"
#include "tessera/ingest.hpp"
#include "tessera/trainer.hpp"
#include "test_support.hpp"

namespace tessera {
namespace {

namespace fs = std::filesystem;
using testing::temp_dir;

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  CliRun r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t line_count(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

// Small synthetic dataset shared by the tests in this file.
fs::path fixture_dataset(const std::string& name, int count, int duplicates = 0) {
  const fs::path dir = temp_dir(name);
  const auto r = cli({"make-fixtures", "--dest", (dir / "data").string(), "--count",
                      std::to_string(count), "--seed", "4200", "--duplicates",
                      std::to_string(duplicates)});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  return dir / "data";
}

fs::path checkerboard_frames(const fs::path& dataset, const fs::path& dest) {
  const auto r = cli({"render-frames", "--dataset", dataset.string(), "--dest", dest.string(),
                      "--attack", "checkerboard"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  return dest;
}

class ScopedEnv {
 public:
  ScopedEnv(const char* name, const std::string& value) : name_(name) {
    if (const char* old = std::getenv(name)) old_ = old;
    ::setenv(name, value.c_str(), 1);
  }
  ~ScopedEnv() {
    if (old_) {
      ::setenv(name_, old_->c_str(), 1);
    } else {
      ::unsetenv(name_);
    }
  }

 private:
  const char* name_;
  std::optional<std::string> old_;
};

TEST(ExitCodes, Contract) {
  EXPECT_EQ(exit_code_for(Command::kTrain, ErrorCode::kConfigError), kExitData);
  EXPECT_EQ(exit_code_for(Command::kEval, ErrorCode::kConfigError), kExitData);
  EXPECT_EQ(exit_code_for(Command::kIngest, ErrorCode::kParseError), kExitData);
  EXPECT_EQ(exit_code_for(Command::kIngest, ErrorCode::kEmptyDirectory), kExitData);
  EXPECT_EQ(exit_code_for(Command::kTrain, ErrorCode::kNoGradient), kExitTraining);
  EXPECT_EQ(exit_code_for(Command::kTrain, ErrorCode::kNoPolygons), kExitTraining);
  EXPECT_EQ(exit_code_for(Command::kTrain, ErrorCode::kNoBoxes), kExitTraining);
  EXPECT_EQ(exit_code_for(Command::kTrain, ErrorCode::kParseError), kExitData);
  EXPECT_EQ(exit_code_for(Command::kEval, ErrorCode::kAdapterFailure), kExitEvaluation);
  EXPECT_EQ(exit_code_for(Command::kEval, ErrorCode::kIoError), kExitEvaluation);
  EXPECT_EQ(exit_code_for(Command::kTransfer, ErrorCode::kAdapterFailure), kExitEvaluation);
}

TEST(Cli, UnknownSubcommandIsUsageError) {
  EXPECT_EQ(cli({"frobnicate"}).code, kExitData);
  EXPECT_EQ(cli({}).code, kExitData);
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
}

TEST(RunConfigJson, RoundTrip) {
  RunConfig cfg;
  cfg.name = "r1";
  cfg.dataset = "d";
  cfg.defenses = {"none", "jpeg:50"};
  cfg.asr_threshold = 0.3;
  cfg.train.steps = 7;
  cfg.clothing_labels = {"shirt"};
  const auto doc = cfg.to_json();
  EXPECT_EQ(RunConfig::from_json(doc).to_json(), doc);
  auto bad = doc;
  bad["train"]["stepz"] = 1;
  EXPECT_TESSERA_ERROR(RunConfig::from_json(bad), ErrorCode::kConfigError);
}

TEST(CmdIngest, KeepsLargestOfDuplicatePair) {
  // Five scenes plus an enlarged copy of the first.
  const fs::path data = fixture_dataset("cli_ingest", 5, 1);
  const fs::path dest = data.parent_path() / "norm";
  const auto r = cli({"ingest", "--input", data.string(), "--dest", dest.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("loaded 6"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("kept 5"), std::string::npos) << r.out;
  const auto index = nlohmann::json::parse(slurp(dest / "index.json"));
  EXPECT_EQ(index.at("kept"), 5);
  std::vector<std::string> stems;
  for (const auto& s : index.at("samples")) stems.push_back(s.at("stem"));
  EXPECT_NE(std::find(stems.begin(), stems.end(), "dup_0000"), stems.end());
  EXPECT_EQ(std::find(stems.begin(), stems.end(), "scene_0000"), stems.end());
}

TEST(CmdIngest, EmptyDirectoryExits2) {
  const fs::path dir = temp_dir("cli_ingest_empty");
  const auto r = cli({"ingest", "--input", dir.string(), "--dest", (dir / "out").string()});
  EXPECT_EQ(r.code, kExitData);
}

TEST(CmdIngest, ParseErrorNamesFileAndLine) {
  const fs::path data = fixture_dataset("cli_ingest_bad", 2);
  {
    std::ofstream f(data / "labels" / "scene_0001.txt", std::ios::app);
    f << "0 0.5 oops 0.1 0.1\n";
  }
  const auto r = cli({"ingest", "--input", data.string(), "--dest", (data / "out").string()});
  EXPECT_EQ(r.code, kExitData);
  EXPECT_NE(r.err.find("scene_0001"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("line"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(data / "out"));
}

TEST(CmdTrain, ZeroStepsWritesInitialization) {
  const fs::path data = fixture_dataset("cli_train0", 4);
  const fs::path runs = data.parent_path() / "runs";
  const auto r = cli({"train", "--dataset", data.string(), "--mode", "pattern", "--steps", "0",
                      "--seed", "11", "--output", runs.string(), "--name", "init"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const fs::path dir = runs / "init";
  ASSERT_TRUE(fs::exists(dir / "element.png"));
  ASSERT_TRUE(fs::exists(dir / "manifest.json"));
  const auto sidecar = nlohmann::json::parse(slurp(dir / "element.json"));
  const auto samples = load_dataset(data, default_clothing_labels(), 1);
  const int side = element_side_for(TrainConfig{}.element_fraction, mean_bbox_side(samples, 0),
                                    TrainConfig{}.min_element_side);
  EXPECT_EQ(sidecar.at("side_px"), side);
  EXPECT_EQ(sidecar.at("mode"), "pattern");
  const ImageBuffer written = read_image(dir / "element.png");
  const PatchElement expected = initial_element(side, 11);
  ASSERT_EQ(written.height(), side);
  for (std::size_t i = 0; i < written.data().size(); ++i) {
    EXPECT_NEAR(written.data()[i], expected.pixels().data()[i], 0.5 / 255.0 + 1e-12);
  }
}

TEST(CmdTrain, PatternLossTrendsDown) {
  const fs::path data = fixture_dataset("cli_train", 8);
  const fs::path runs = data.parent_path() / "runs";
  const auto r = cli({"train", "--dataset", data.string(), "--mode", "pattern", "--steps", "60",
                      "--optimizer", "adam", "--step-size", "0.05", "--output", runs.string(),
                      "--name", "p"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto manifest = nlohmann::json::parse(slurp(runs / "p" / "manifest.json"));
  const auto trace = manifest.at("training").at("detection_trace").get<std::vector<double>>();
  ASSERT_EQ(trace.size(), 60u);
  double head = 0.0;
  double tail = 0.0;
  for (int i = 0; i < 10; ++i) {
    head += trace[static_cast<std::size_t>(i)];
    tail += trace[trace.size() - 1 - static_cast<std::size_t>(i)];
  }
  EXPECT_LT(tail, head);
}

TEST(CmdTrain, MissingPolygonsExits3) {
  const fs::path data = fixture_dataset("cli_train_nopoly", 3);
  fs::remove_all(data / "polygons");
  const auto r = cli({"train", "--dataset", data.string(), "--mode", "pattern", "--steps", "1",
                      "--output", (data.parent_path() / "runs").string()});
  EXPECT_EQ(r.code, kExitTraining);
  // Patch mode needs no polygons.
  const auto patch = cli({"train", "--dataset", data.string(), "--mode", "patch", "--steps", "0",
                          "--output", (data.parent_path() / "runs").string()});
  EXPECT_EQ(patch.code, kExitOk) << patch.err;
}

TEST(CmdTrain, GradientFreeDetectorExits3WithName) {
  const fs::path data = fixture_dataset("cli_train_nograd", 2);
  const auto r = cli({"train", "--dataset", data.string(), "--steps", "1", "--detector",
                      "stub=constant:0.5", "--output", (data.parent_path() / "runs").string()});
  EXPECT_EQ(r.code, kExitTraining);
  EXPECT_NE(r.err.find("stub"), std::string::npos) << r.err;
}

TEST(CmdTrain, InvalidFlagValueExits2) {
  const fs::path data = fixture_dataset("cli_train_badflag", 2);
  EXPECT_EQ(cli({"train", "--dataset", data.string(), "--optimizer", "rmsprop"}).code, kExitData);
  EXPECT_EQ(cli({"train", "--dataset", data.string(), "--steps", "-1"}).code, kExitData);
}

TEST(CmdEval, NonexistentFramesExits4) {
  const fs::path dir = temp_dir("cli_eval_missing");
  const auto r = cli({"eval", "--frames", (dir / "nope").string(), "--output", dir.string()});
  EXPECT_EQ(r.code, kExitEvaluation);
}

TEST(CmdEval, ControlFramesOnConstantDetector) {
  const fs::path data = fixture_dataset("cli_eval_control", 4);
  const fs::path frames = checkerboard_frames(data, data.parent_path() / "control");
  const fs::path runs = data.parent_path() / "runs";
  const auto r = cli({"eval", "--frames", frames.string(), "--detector", "constant:1.0",
                      "--output", runs.string(), "--name", "c"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("control"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("0 (1.00±0.00)"), std::string::npos) << r.out;
  const std::string records = slurp(runs / "c" / "records.csv");
  EXPECT_EQ(line_count(records), 5u);
  EXPECT_TRUE(fs::exists(runs / "c" / "report.txt"));
}

TEST(CmdEval, SixDefenseConditions) {
  const fs::path data = fixture_dataset("cli_eval_defense", 3);
  const fs::path frames = checkerboard_frames(data, data.parent_path() / "frames");
  const fs::path runs = data.parent_path() / "runs";
  const auto r = cli({"eval", "--frames", frames.string(), "--output", runs.string(), "--name",
                      "d", "--defense", "none", "--defense", "resize:0.5", "--defense",
                      "resize:0.25", "--defense", "jpeg:75", "--defense", "jpeg:50", "--defense",
                      "jpeg:25"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const std::vector<std::string> labels{"No defense",        "50% resize",        "25% resize",
                                        "75% quality jpg", "50% quality jpg", "25% quality jpg"};
  std::size_t pos = 0;
  for (const auto& label : labels) {
    const auto at = r.out.find(label, pos);
    ASSERT_NE(at, std::string::npos) << label << "\n" << r.out;
    pos = at;
  }
  EXPECT_EQ(line_count(slurp(runs / "d" / "records.csv")), 1u + 6u * 3u);
  EXPECT_EQ(cli({"eval", "--frames", frames.string(), "--defense", "blur:3"}).code, kExitData);
}

TEST(CmdEval, FromManifestReproducesRecords) {
  const fs::path data = fixture_dataset("cli_eval_manifest", 3);
  const fs::path frames = checkerboard_frames(data, data.parent_path() / "frames");
  const fs::path runs = data.parent_path() / "runs";
  ASSERT_EQ(cli({"eval", "--frames", frames.string(), "--defense", "jpeg:50", "--output",
                 runs.string(), "--name", "a"})
                .code,
            kExitOk);
  const auto again = cli({"eval", "--from-manifest", (runs / "a" / "manifest.json").string(),
                          "--output", runs.string(), "--name", "b"});
  ASSERT_EQ(again.code, kExitOk) << again.err;
  EXPECT_EQ(slurp(runs / "a" / "records.csv"), slurp(runs / "b" / "records.csv"));
}

TEST(CmdTrain, FromManifestReproducesElement) {
  const fs::path data = fixture_dataset("cli_train_manifest", 3);
  const fs::path runs = data.parent_path() / "runs";
  ASSERT_EQ(cli({"train", "--dataset", data.string(), "--steps", "3", "--output", runs.string(),
                 "--name", "a"})
                .code,
            kExitOk);
  ASSERT_EQ(cli({"train", "--from-manifest", (runs / "a" / "manifest.json").string(),
                 "--output", runs.string(), "--name", "b"})
                .code,
            kExitOk);
  EXPECT_EQ(slurp(runs / "a" / "element.png"), slurp(runs / "b" / "element.png"));
}

TEST(CmdEval, UnknownConfigKeyAbortsBeforeWrites) {
  const fs::path dir = temp_dir("cli_badconfig");
  const fs::path runs = dir / "runs";
  {
    std::ofstream f(dir / "run.json");
    f << R"({"name": "x", "frames": "whatever", "defence": ["none"]})";
  }
  for (const std::string cmd : {"eval", "train", "ingest", "transfer", "sweep"}) {
    std::vector<std::string> args{cmd, "--config", (dir / "run.json").string(), "--output",
                                  runs.string()};
    if (cmd == "sweep") {
      args.push_back("--element");
      args.push_back((dir / "run.json").string());
    }
    EXPECT_EQ(cli(args).code, kExitData) << cmd;
    EXPECT_FALSE(fs::exists(runs)) << cmd;
  }
}

TEST(CmdEval, RunsDirEnvironment) {
  const fs::path data = fixture_dataset("cli_env", 2);
  const fs::path frames = checkerboard_frames(data, data.parent_path() / "frames");
  const fs::path env_root = data.parent_path() / "from_env";
  const fs::path flag_root = data.parent_path() / "from_flag";
  const fs::path cfg_root = data.parent_path() / "from_config";
  RunConfig cfg;
  cfg.name = "e";
  cfg.frames = frames.string();
  cfg.detector = "constant:0.7";
  cfg.output = cfg_root.string();
  const fs::path cfg_path = data.parent_path() / "run.json";
  std::ofstream(cfg_path) << cfg.to_json().dump();

  EXPECT_EQ(run_directory(cfg), cfg_root / "e");
  ASSERT_EQ(cli({"eval", "--config", cfg_path.string()}).code, kExitOk);
  EXPECT_TRUE(fs::exists(cfg_root / "e" / "records.csv"));
  {
    ScopedEnv env("PATTERN_RUNS_DIR", env_root.string());
    EXPECT_EQ(run_directory(cfg), env_root / "e");
    ASSERT_EQ(cli({"eval", "--config", cfg_path.string()}).code, kExitOk);
    EXPECT_TRUE(fs::exists(env_root / "e" / "records.csv"));
    ASSERT_EQ(cli({"eval", "--config", cfg_path.string(), "--output", flag_root.string()}).code,
              kExitOk);
    EXPECT_TRUE(fs::exists(flag_root / "e" / "records.csv"));
  }
}

TEST(CmdTransfer, TwoByTwoMatrix) {
  const fs::path data = fixture_dataset("cli_transfer", 3);
  const fs::path sets = data.parent_path() / "sets";
  checkerboard_frames(data, sets / "alpha");
  ASSERT_EQ(cli({"render-frames", "--dataset", data.string(), "--dest", (sets / "beta").string()})
                .code,
            kExitOk);
  const fs::path runs = data.parent_path() / "runs";
  const auto r = cli({"transfer", "--frames", sets.string(), "--test-detector",
                      "half=constant:0.3", "--test-detector", "full=constant:1.0", "--output",
                      runs.string(), "--name", "t"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const std::string results = slurp(runs / "t" / "results.csv");
  EXPECT_EQ(line_count(results), 5u) << results;
  EXPECT_NE(results.find("alpha|full"), std::string::npos);
  EXPECT_NE(results.find("beta|half"), std::string::npos);
  // Every cell in the constant-1.0 column.
  std::istringstream lines(r.out);
  std::string line;
  int full_cells = 0;
  while (std::getline(lines, line)) {
    if (line.rfind("alpha", 0) == 0 || line.rfind("beta", 0) == 0) {
      // 0.3 is below the detection threshold, so those frames impute zero.
      EXPECT_NE(line.find("100 (0.00±0.00)"), std::string::npos) << line;
      EXPECT_NE(line.find("0 (1.00±0.00)", line.find("100 (0.00")), std::string::npos) << line;
      ++full_cells;
    }
  }
  EXPECT_EQ(full_cells, 2) << r.out;
}

TEST(CmdTransfer, SingleCellMatchesEval) {
  const fs::path data = fixture_dataset("cli_transfer_one", 3);
  const fs::path sets = data.parent_path() / "sets";
  checkerboard_frames(data, sets / "only");
  const fs::path runs = data.parent_path() / "runs";
  ASSERT_EQ(cli({"transfer", "--frames", sets.string(), "--output", runs.string(), "--name", "t"})
                .code,
            kExitOk);
  ASSERT_EQ(cli({"eval", "--frames", (sets / "only").string(), "--output", runs.string(),
                 "--name", "e"})
                .code,
            kExitOk);
  auto tail = [](const std::string& csv) {
    std::string out;
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) out += line.substr(line.find(',', line.find(',') + 1)) + "\n";
    return out;
  };
  EXPECT_EQ(tail(slurp(runs / "t" / "records.csv")), tail(slurp(runs / "e" / "records.csv")));
}

TEST(CmdReport, RerendersResults) {
  const fs::path data = fixture_dataset("cli_report", 2);
  const fs::path frames = checkerboard_frames(data, data.parent_path() / "frames");
  const fs::path runs = data.parent_path() / "runs";
  ASSERT_EQ(cli({"eval", "--frames", frames.string(), "--detector", "constant:0.2", "--output",
                 runs.string(), "--name", "r"})
                .code,
            kExitOk);
  const auto r = cli({"report", "--results", (runs / "r" / "results.csv").string(), "--style",
                      "exp2"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out, slurp(runs / "r" / "report.txt"));
  EXPECT_EQ(cli({"report", "--results", (runs / "r" / "results.csv").string(), "--style",
                 "fancy"})
                .code,
            kExitData);
}

}  // namespace
}  // namespace tessera
