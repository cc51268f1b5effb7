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

#include "coughscreen/automl.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>
#include <mutex>
#include <numeric>

#include "json.hpp"

#include "coughscreen/error.hpp"
#include "coughscreen/feature_prep.hpp"
#include "coughscreen/metrics.hpp"
#include "coughscreen/parallel.hpp"

namespace coughscreen {
namespace {

void require_both_classes(const Dataset& d, const char* which) {
  if (!d.fully_labeled()) {
    throw Error(ErrorCode::kLabelMissing, std::string(which) + " split has unlabeled rows");
  }
  const std::size_t pos = d.count_positive();
  if (pos == 0 || pos == d.size()) {
    throw Error(ErrorCode::kSingleClassData,
                std::string(which) + " split must contain both classes");
  }
}

/// Thread-safe genome -> fitness cache.
class FitnessCache {
 public:
  std::optional<Fitness> find(const std::string& key) const {
    std::lock_guard lock(mutex_);
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }
  void insert(const std::string& key, const Fitness& f) {
    std::lock_guard lock(mutex_);
    entries_.emplace(key, f);
  }
  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
  }

 private:
  mutable std::mutex mutex_;
  std::map<std::string, Fitness> entries_;
};

}  // namespace

Genome Genome::random(Rng& rng) {
  Genome g;
  for (int i = 0; i < kGeneCount; ++i) g.resample_gene(i, rng);
  return g;
}

void Genome::resample_gene(int index, Rng& rng) {
  switch (index) {
    case 0:
      n_estimators = kEstimatorChoices[rng.below(kEstimatorChoices.size())];
      break;
    case 1: criterion = rng.bernoulli(0.5) ? Criterion::kEntropy : Criterion::kGini; break;
    case 2: max_features = rng.uniform(kMaxFeaturesLo, kMaxFeaturesHi); break;
    case 3: min_samples_leaf = static_cast<int>(rng.between(kMinLeafLo, kMinLeafHi)); break;
    case 4: min_samples_split = static_cast<int>(rng.between(kMinSplitLo, kMinSplitHi)); break;
    case 5: bootstrap = rng.bernoulli(0.5); break;
    case 6: split_mode = rng.bernoulli(0.5) ? SplitMode::kRandom : SplitMode::kBest; break;
    case 7: l2_normalize = rng.bernoulli(0.5); break;
    default: throw Error(ErrorCode::kInternal, "gene index out of range");
  }
}

void Genome::swap_gene(int index, Genome& other) {
  switch (index) {
    case 0: std::swap(n_estimators, other.n_estimators); break;
    case 1: std::swap(criterion, other.criterion); break;
    case 2: std::swap(max_features, other.max_features); break;
    case 3: std::swap(min_samples_leaf, other.min_samples_leaf); break;
    case 4: std::swap(min_samples_split, other.min_samples_split); break;
    case 5: std::swap(bootstrap, other.bootstrap); break;
    case 6: std::swap(split_mode, other.split_mode); break;
    case 7: std::swap(l2_normalize, other.l2_normalize); break;
    default: throw Error(ErrorCode::kInternal, "gene index out of range");
  }
}

bool Genome::in_range() const {
  return std::find(kEstimatorChoices.begin(), kEstimatorChoices.end(), n_estimators) !=
             kEstimatorChoices.end() &&
         max_features >= kMaxFeaturesLo && max_features <= kMaxFeaturesHi &&
         min_samples_leaf >= kMinLeafLo && min_samples_leaf <= kMinLeafHi &&
         min_samples_split >= kMinSplitLo && min_samples_split <= kMinSplitHi;
}

std::string Genome::key() const {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d|%s|%.17g|%d|%d|%d|%s|%d", n_estimators,
                std::string(to_string(criterion)).c_str(), max_features, min_samples_leaf,
                min_samples_split, bootstrap ? 1 : 0,
                std::string(to_string(split_mode)).c_str(), l2_normalize ? 1 : 0);
  return buf;
}

ForestParams Genome::to_params(std::uint64_t seed) const {
  ForestParams p;
  p.n_estimators = n_estimators;
  p.criterion = criterion;
  p.max_features = max_features;
  p.min_samples_leaf = min_samples_leaf;
  p.min_samples_split = min_samples_split;
  p.bootstrap = bootstrap;
  p.split_mode = split_mode;
  p.seed = seed;
  return p;
}

Genome default_genome() { return Genome{}; }

Objective parse_objective(std::string_view s) {
  if (s == "auc") return Objective::kAuc;
  if (s == "spec80") return Objective::kSpec80;
  if (s == "lex") return Objective::kLexicographic;
  throw Error(ErrorCode::kInvalidArgument, "unknown objective '" + std::string(s) + "'");
}

std::string_view to_string(Objective o) {
  switch (o) {
    case Objective::kAuc: return "auc";
    case Objective::kSpec80: return "spec80";
    case Objective::kLexicographic: return "lex";
  }
  return "lex";
}

std::partial_ordering compare_fitness(const Fitness& a, const Fitness& b,
                                      Objective objective) {
  if (objective == Objective::kSpec80) {
    if (const auto c = a.spec_at_80 <=> b.spec_at_80; c != 0) return c;
    return a.auc <=> b.auc;
  }
  if (const auto c = a.auc <=> b.auc; c != 0) return c;
  if (objective == Objective::kAuc) return std::partial_ordering::equivalent;
  return a.spec_at_80 <=> b.spec_at_80;
}

void SearchConfig::validate() const {
  auto bad = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, "search config: " + what);
  };
  if (generations < 0) bad("generations must be >= 0");
  if (population < 1) bad("population must be positive");
  if (tournament_size < 1) bad("tournament_size must be positive");
  if (elitism_count < 0 || elitism_count >= population) {
    bad("elitism_count must be in [0, population)");
  }
  if (!(crossover_prob >= 0.0 && crossover_prob <= 1.0)) bad("crossover_prob outside [0,1]");
  if (!(mutation_prob >= 0.0 && mutation_prob <= 1.0)) bad("mutation_prob outside [0,1]");
}

Fitness evaluate_genome(const Genome& genome, const Dataset& train, const Dataset& val,
                        std::uint64_t seed) {
  if (!genome.in_range()) throw Error(ErrorCode::kInternal, "genome out of range");
  const FeaturePrep prep{fit_scaler(train), genome.l2_normalize};
  Forest forest = train_forest(transform_dataset(train, prep), genome.to_params(seed));
  forest.prep = prep;
  std::vector<double> scores(val.size());
  for (std::size_t r = 0; r < val.size(); ++r) scores[r] = score_raw(forest, val.features.row(r));
  const MetricsSummary m = summarize({std::move(scores), val.labels}, 0.8);
  return {m.auc, m.specificity};
}

SearchResult evolve(const Dataset& train, const Dataset& val, const SearchConfig& cfg) {
  cfg.validate();
  require_both_classes(train, "train");
  require_both_classes(val, "validation");

  Rng rng(derive_seed(cfg.seed, "search"));
  const std::uint64_t fitness_seed = derive_seed(cfg.seed, "fitness");
  FitnessCache cache;
  SearchResult result;
  bool have_best = false;

  auto better = [&](const Fitness& a, const Fitness& b) {
    return compare_fitness(a, b, cfg.objective) > 0;
  };

  auto evaluate_population = [&](const std::vector<Genome>& pop, int generation) {
    std::vector<Fitness> fitness(pop.size());
    std::vector<bool> cached(pop.size(), false);
    std::vector<std::optional<double>> seconds(pop.size());
    // First occurrence of each uncached key is trained; the rest are hits.
    std::map<std::string, std::size_t> first_index;
    std::vector<std::size_t> to_train;
    for (std::size_t i = 0; i < pop.size(); ++i) {
      if (!pop[i].in_range()) throw Error(ErrorCode::kInternal, "genome out of range");
      const std::string key = pop[i].key();
      if (cache.find(key) || first_index.count(key)) {
        cached[i] = true;
        continue;
      }
      first_index.emplace(key, i);
      to_train.push_back(i);
    }
    parallel_for(to_train.size(), cfg.jobs, [&](std::size_t t) {
      const std::size_t i = to_train[t];
      const auto start = std::chrono::steady_clock::now();
      const Fitness f = evaluate_genome(pop[i], train, val, fitness_seed);
      if (cfg.record_timing) {
        seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                         .count();
      }
      cache.insert(pop[i].key(), f);
      fitness[i] = f;
    });
    result.trainings += to_train.size();
    for (std::size_t i = 0; i < pop.size(); ++i) {
      if (cached[i]) fitness[i] = *cache.find(pop[i].key());
      EvaluationRecord rec;
      rec.generation = generation;
      rec.genome = pop[i];
      rec.fitness = fitness[i];
      rec.cached = cached[i];
      rec.train_seconds = cached[i] && cfg.record_timing ? std::optional<double>(0.0) : seconds[i];
      result.log.push_back(rec);
      if (!have_best || better(fitness[i], result.best_fitness)) {
        result.best = pop[i];
        result.best_fitness = fitness[i];
        have_best = true;
      }
    }
    result.best_per_generation.push_back(result.best_fitness);
    return fitness;
  };

  std::vector<Genome> pop;
  pop.reserve(static_cast<std::size_t>(cfg.population));
  for (int i = 0; i < cfg.population; ++i) pop.push_back(Genome::random(rng));
  std::vector<Fitness> fitness = evaluate_population(pop, 0);

  for (int gen = 1; gen <= cfg.generations; ++gen) {
    std::vector<std::size_t> order(pop.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return better(fitness[a], fitness[b]);
    });
    auto tournament = [&]() -> const Genome& {
      std::size_t winner = rng.below(pop.size());
      for (int t = 1; t < cfg.tournament_size; ++t) {
        const std::size_t c = rng.below(pop.size());
        if (better(fitness[c], fitness[winner])) winner = c;
      }
      return pop[winner];
    };

    std::vector<Genome> next;
    next.reserve(pop.size());
    for (int e = 0; e < cfg.elitism_count; ++e) next.push_back(pop[order[e]]);
    while (next.size() < pop.size()) {
      Genome a = tournament();
      Genome b = tournament();
      if (rng.bernoulli(cfg.crossover_prob)) {
        for (int g = 0; g < Genome::kGeneCount; ++g) {
          if (rng.bernoulli(0.5)) a.swap_gene(g, b);
        }
      }
      for (Genome* child : {&a, &b}) {
        for (int g = 0; g < Genome::kGeneCount; ++g) {
          if (rng.bernoulli(cfg.mutation_prob)) child->resample_gene(g, rng);
        }
      }
      next.push_back(a);
      if (next.size() < pop.size()) next.push_back(b);
    }
    pop = std::move(next);
    fitness = evaluate_population(pop, gen);
  }
  return result;
}

std::string search_log_jsonl(const std::vector<EvaluationRecord>& log) {
  using nlohmann::json;
  std::string out;
  for (const auto& r : log) {
    const Genome& g = r.genome;
    json j = {{"generation", r.generation},
              {"genome",
               {{"n_estimators", g.n_estimators},
                {"criterion", to_string(g.criterion)},
                {"max_features", g.max_features},
                {"min_samples_leaf", g.min_samples_leaf},
                {"min_samples_split", g.min_samples_split},
                {"bootstrap", g.bootstrap},
                {"split_mode", to_string(g.split_mode)},
                {"l2_normalize", g.l2_normalize}}},
              {"auc", r.fitness.auc},
              {"spec_at_80", r.fitness.spec_at_80},
              {"train_seconds", r.train_seconds ? json(*r.train_seconds) : json(nullptr)},
              {"cached", r.cached}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace coughscreen
