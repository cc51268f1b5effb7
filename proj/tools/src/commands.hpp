// Copyright 2026 The coughscreen Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef COUGHSCREEN_TOOLS_COMMANDS_HPP_
#define COUGHSCREEN_TOOLS_COMMANDS_HPP_

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>

#include "coughscreen/automl.hpp"
#include "coughscreen/evaluation.hpp"
#include "coughscreen/forest.hpp"
#include "coughscreen/parallel.hpp"
#include "coughscreen/tsne.hpp"
#include "json.hpp"

namespace coughscreen::cli {

/// JSON-lines logger: one object per line with "level", "cmd" and "event".
class Logger {
 public:
  Logger(std::ostream& sink, std::string command) : sink_(sink), command_(std::move(command)) {}

  void info(std::string_view event, nlohmann::json fields = nlohmann::json::object()) {
    write("info", event, std::move(fields));
  }
  void warn(std::string_view event, nlohmann::json fields = nlohmann::json::object()) {
    write("warn", event, std::move(fields));
  }
  void error(std::string_view event, nlohmann::json fields = nlohmann::json::object()) {
    write("error", event, std::move(fields));
  }

 private:
  void write(std::string_view level, std::string_view event, nlohmann::json fields);

  std::ostream& sink_;
  std::string command_;
};

struct Common {
  std::uint64_t seed = 42;
  unsigned jobs = default_jobs();
  std::filesystem::path out;
};

struct ExtractArgs {
  Common common;
  std::filesystem::path input;
  std::filesystem::path backends;
};

struct SynthArgs {
  Common common;
  SyntheticConfig config;
};

struct TrainArgs {
  Common common;
  std::filesystem::path manifest;
  std::filesystem::path folds;
  ForestParams params;
  bool l2_normalize = true;
  std::string scaler_scope = "train";
};

struct EvalArgs {
  Common common;
  std::filesystem::path manifest;
  std::filesystem::path folds;
  std::filesystem::path models;
  bool refit_with_val = false;
  double target_sensitivity = kDefaultTargetSensitivity;
};

struct SearchArgs {
  Common common;
  std::filesystem::path manifest;
  std::filesystem::path folds;
  int fold = 1;
  SearchConfig config;
  std::string objective = "lex";
};

struct ScoreArgs {
  Common common;
  std::filesystem::path manifest;
  std::filesystem::path model;
  std::filesystem::path ensemble;
  double target_sensitivity = kDefaultTargetSensitivity;
};

struct ProjectArgs {
  Common common;
  std::filesystem::path manifest;
  TsneConfig config;
  bool prepare = true;
};

void cmd_extract(const ExtractArgs& a, std::ostream& out, Logger& log);
void cmd_synth(const SynthArgs& a, std::ostream& out, Logger& log);
void cmd_train(const TrainArgs& a, std::ostream& out, Logger& log);
void cmd_eval(const EvalArgs& a, std::ostream& out, Logger& log);
void cmd_search(const SearchArgs& a, std::ostream& out, Logger& log);
void cmd_score(const ScoreArgs& a, std::ostream& out, Logger& log);
void cmd_project(const ProjectArgs& a, std::ostream& out, Logger& log);

}  // namespace coughscreen::cli

#endif  // COUGHSCREEN_TOOLS_COMMANDS_HPP_
