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

#include "coughscreen/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>
#include <new>

#include "CLI11.hpp"
#include "commands.hpp"
#include "coughscreen/error.hpp"

namespace coughscreen::cli {
namespace {

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Master seed")->capture_default_str();
  cmd->add_option("--jobs", c.jobs, "Maximum worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--out", c.out, "Output directory")->required();
}

void add_forest_options(CLI::App* cmd, ForestParams& p, std::string& criterion,
                        std::string& split_mode) {
  cmd->add_option("--n-estimators", p.n_estimators)->capture_default_str();
  cmd->add_option("--criterion", criterion)
      ->check(CLI::IsMember({"entropy", "gini"}))
      ->capture_default_str();
  cmd->add_option("--max-features", p.max_features)->capture_default_str();
  cmd->add_option("--min-samples-leaf", p.min_samples_leaf)->capture_default_str();
  cmd->add_option("--min-samples-split", p.min_samples_split)->capture_default_str();
  cmd->add_flag("--bootstrap,!--no-bootstrap", p.bootstrap)->capture_default_str();
  cmd->add_option("--split-mode", split_mode)
      ->check(CLI::IsMember({"random", "best"}))
      ->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& log_sink) {
  CLI::App app{"Cough-recording COVID-19 screening pipeline"};
  app.require_subcommand(1);

  ExtractArgs extract;
  SynthArgs synth;
  TrainArgs train;
  EvalArgs eval;
  SearchArgs search;
  ScoreArgs score;
  ProjectArgs project;
  std::string criterion = "entropy";
  std::string split_mode = "random";
  std::function<void(std::ostream&, Logger&)> action;

  auto* c_extract = app.add_subcommand("extract", "Embed and pool audio into feature files");
  add_common(c_extract, extract.common);
  c_extract->add_option("--input", extract.input, "Audio directory or audio manifest JSON")
      ->required();
  c_extract->add_option("--backends", extract.backends, "Backend manifest JSON")->required();
  c_extract->callback([&] { action = [&](auto& o, auto& l) { cmd_extract(extract, o, l); }; });

  auto* c_synth = app.add_subcommand("synth", "Write a synthetic two-class dataset with folds");
  add_common(c_synth, synth.common);
  c_synth->add_option("--n", synth.config.n)->capture_default_str();
  c_synth->add_option("--dim", synth.config.dim)->capture_default_str();
  c_synth->add_option("--imbalance", synth.config.imbalance)->capture_default_str();
  c_synth->add_option("--separation", synth.config.separation)->capture_default_str();
  c_synth->add_option("--folds", synth.config.folds)->capture_default_str();
  c_synth->callback([&] { action = [&](auto& o, auto& l) { cmd_synth(synth, o, l); }; });

  auto* c_train = app.add_subcommand("train", "Train one forest per fold");
  add_common(c_train, train.common);
  c_train->add_option("--manifest", train.manifest, "Dataset manifest")->required();
  c_train->add_option("--folds", train.folds, "Directory of fold lists")->required();
  add_forest_options(c_train, train.params, criterion, split_mode);
  c_train->add_flag("--l2,!--no-l2", train.l2_normalize, "L2-normalize after scaling")
      ->capture_default_str();
  c_train->add_option("--scaler-scope", train.scaler_scope)
      ->check(CLI::IsMember({"train", "all"}))
      ->capture_default_str();
  c_train->callback([&] {
    train.params.criterion = parse_criterion(criterion);
    train.params.split_mode = parse_split_mode(split_mode);
    action = [&](auto& o, auto& l) { cmd_train(train, o, l); };
  });

  auto* c_eval = app.add_subcommand("eval", "Evaluate fold models on their validation lists");
  add_common(c_eval, eval.common);
  c_eval->add_option("--manifest", eval.manifest)->required();
  c_eval->add_option("--folds", eval.folds)->required();
  c_eval->add_option("--models", eval.models, "Directory holding fold_{k}.json")->required();
  c_eval->add_flag("--refit-with-val", eval.refit_with_val,
                   "Retrain the best fold on train + validation for best_model.json");
  c_eval->add_option("--target-sensitivity", eval.target_sensitivity)
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  c_eval->callback([&] { action = [&](auto& o, auto& l) { cmd_eval(eval, o, l); }; });

  auto* c_search = app.add_subcommand("search", "Genetic search over pipeline hyperparameters");
  add_common(c_search, search.common);
  c_search->add_option("--manifest", search.manifest)->required();
  c_search->add_option("--folds", search.folds)->required();
  c_search->add_option("--fold", search.fold, "Fold whose lists define train/validation")
      ->capture_default_str();
  c_search->add_option("--generations", search.config.generations)->capture_default_str();
  c_search->add_option("--population", search.config.population)->capture_default_str();
  c_search->add_option("--tournament-size", search.config.tournament_size)
      ->capture_default_str();
  c_search->add_option("--crossover-prob", search.config.crossover_prob)->capture_default_str();
  c_search->add_option("--mutation-prob", search.config.mutation_prob)->capture_default_str();
  c_search->add_option("--elitism", search.config.elitism_count)->capture_default_str();
  c_search->add_option("--objective", search.objective)
      ->check(CLI::IsMember({"auc", "spec80", "lex"}))
      ->capture_default_str();
  c_search->add_flag("--record-timing", search.config.record_timing,
                     "Log wall-clock training seconds (makes the log nondeterministic)");
  c_search->callback([&] { action = [&](auto& o, auto& l) { cmd_search(search, o, l); }; });

  auto* c_score = app.add_subcommand("score", "Score a manifest with a model or fold ensemble");
  add_common(c_score, score.common);
  c_score->add_option("--manifest", score.manifest)->required();
  c_score->add_option("--model", score.model, "Model JSON");
  c_score->add_option("--ensemble", score.ensemble, "results.json from eval");
  c_score->add_option("--target-sensitivity", score.target_sensitivity)
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  c_score->callback([&] { action = [&](auto& o, auto& l) { cmd_score(score, o, l); }; });

  auto* c_project = app.add_subcommand("project", "Exact t-SNE scatter of a manifest");
  add_common(c_project, project.common);
  c_project->add_option("--manifest", project.manifest)->required();
  c_project->add_option("--perplexity", project.config.perplexity)->capture_default_str();
  c_project->add_option("--iterations", project.config.iterations)->capture_default_str();
  c_project->add_option("--learning-rate", project.config.learning_rate)->capture_default_str();
  c_project->add_option("--exaggeration", project.config.early_exaggeration)
      ->capture_default_str();
  c_project->add_option("--exaggeration-iters", project.config.exaggeration_iterations)
      ->capture_default_str();
  c_project->add_flag("--prepare,!--no-prepare", project.prepare,
                      "Standardize and L2-normalize before computing distances")
      ->capture_default_str();
  c_project->callback([&] { action = [&](auto& o, auto& l) { cmd_project(project, o, l); }; });

  std::string command = "cli";
  Logger early(log_sink, command);
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    early.error("usage", {{"message", e.what()}});
    return kExitValidation;
  } catch (const Error& e) {
    early.error("usage", {{"message", e.what()}, {"code", to_string(e.code())}});
    return kExitValidation;
  }

  for (const auto* sub : app.get_subcommands()) command = sub->get_name();
  Logger log(log_sink, command);
  try {
    log.info("start");
    action(out, log);
    log.info("done");
    return kExitOk;
  } catch (const Error& e) {
    log.error("failed", {{"code", to_string(e.code())}, {"message", e.what()}});
    return e.is_validation() ? kExitValidation : kExitInternal;
  } catch (const std::filesystem::filesystem_error& e) {
    log.error("failed", {{"code", "IoError"}, {"message", e.what()}});
    return kExitValidation;
  } catch (const std::exception& e) {
    log.error("failed", {{"code", "Internal"}, {"message", e.what()}});
    return kExitInternal;
  }
}

}  // namespace coughscreen::cli
