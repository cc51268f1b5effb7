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

#ifndef COUGHSCREEN_AUTOML_HPP_
#define COUGHSCREEN_AUTOML_HPP_

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coughscreen/dataset.hpp"
#include "coughscreen/forest.hpp"
#include "coughscreen/rng.hpp"

namespace coughscreen {

inline constexpr std::array<int, 4> kEstimatorChoices = {50, 100, 200, 400};
inline constexpr double kMaxFeaturesLo = 0.1;
inline constexpr double kMaxFeaturesHi = 1.0;
inline constexpr int kMinLeafLo = 1, kMinLeafHi = 20;
inline constexpr int kMinSplitLo = 2, kMinSplitHi = 20;

/// One point of the pipeline search space.
struct Genome {
  int n_estimators = 100;
  Criterion criterion = Criterion::kEntropy;
  double max_features = 0.75;
  int min_samples_leaf = 4;
  int min_samples_split = 3;
  bool bootstrap = false;
  SplitMode split_mode = SplitMode::kRandom;
  bool l2_normalize = true;

  static constexpr int kGeneCount = 8;

  /// Uniform over every gene's range.
  static Genome random(Rng& rng);
  /// Redraws gene `index` (0..kGeneCount-1) uniformly.
  void resample_gene(int index, Rng& rng);
  /// Exchanges gene `index` with `other`.
  void swap_gene(int index, Genome& other);

  bool in_range() const;
  /// Stable textual key; equal genomes produce equal keys.
  std::string key() const;
  ForestParams to_params(std::uint64_t seed) const;

  friend bool operator==(const Genome&, const Genome&) = default;
};

/// The tuned configuration as a genome.
Genome default_genome();

enum class Objective { kAuc, kSpec80, kLexicographic };
Objective parse_objective(std::string_view s);
std::string_view to_string(Objective o);

struct Fitness {
  /// Validation AUC, fraction.
  double auc = 0.0;
  /// Validation specificity at 80% sensitivity, fraction.
  double spec_at_80 = 0.0;
};

/// Lexicographic (auc, spec_at_80) under kLexicographic, AUC alone under
/// kAuc, and (spec_at_80, auc) under kSpec80.
std::partial_ordering compare_fitness(const Fitness& a, const Fitness& b,
                                      Objective objective = Objective::kLexicographic);

struct SearchConfig {
  int generations = 10;
  int population = 20;
  int tournament_size = 3;
  /// Per selected pair.
  double crossover_prob = 0.9;
  /// Per gene.
  double mutation_prob = 0.1;
  int elitism_count = 2;
  Objective objective = Objective::kLexicographic;
  std::uint64_t seed = 42;
  unsigned jobs = 1;
  /// Record wall-clock training time per evaluation. Off by default so the
  /// search log is byte-reproducible.
  bool record_timing = false;

  void validate() const;
};

struct EvaluationRecord {
  int generation = 0;
  Genome genome;
  Fitness fitness;
  bool cached = false;
  std::optional<double> train_seconds;
};

struct SearchResult {
  Genome best;
  Fitness best_fitness;
  /// All-time best fitness after each generation (index 0 = initial).
  std::vector<Fitness> best_per_generation;
  std::vector<EvaluationRecord> log;
  /// Distinct genomes actually trained.
  std::size_t trainings = 0;
};

/// Fitness of one genome: scaler fit on `train`, forest trained on it,
/// scored on `val`. Deterministic in (genome, seed).
Fitness evaluate_genome(const Genome& genome, const Dataset& train,
                        const Dataset& val, std::uint64_t seed);

/// Genetic search: random initial population, then per generation elitism
/// plus tournament selection, uniform crossover and per-gene mutation.
/// Returns the best genome ever evaluated. Throws kSingleClassData when
/// either split lacks a class.
SearchResult evolve(const Dataset& train, const Dataset& val, const SearchConfig& cfg);

/// One JSON object per line: {generation, genome{...}, auc, spec_at_80,
/// train_seconds, cached}.
std::string search_log_jsonl(const std::vector<EvaluationRecord>& log);

}  // namespace coughscreen

#endif  // COUGHSCREEN_AUTOML_HPP_
