// Copyright 2026 The DualTOD Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dualtod/augment.hpp"
#include "dualtod/corpus.hpp"
#include "dualtod/eval/metrics.hpp"
#include "dualtod/io.hpp"
#include "dualtod/kb.hpp"
#include "dualtod/neural/vocab.hpp"
#include "dualtod/train/train.hpp"

namespace dualtod::train {

// Ontology tokens (domain tags, slot names, placeholders) that every
// vocabulary reserves, so a domain absent from training data still has ids.
std::vector<std::string> ontology_tokens(const OntologySchema& schema);

struct CellResult {
  double fraction = 0.0;
  std::uint64_t seed = 0;
  std::string variant;
  std::size_t m = 0;
  std::size_t train_dialogues = 0;
  std::size_t pairs = 0;
  std::size_t shortfall_turns = 0;
  eval::MetricsReport metrics;
  std::size_t steps = 0;
  double wall_clock_s = 0.0;

  OrderedJson to_json() const;
};

// Builds the training set at `m` rewrites, trains a fresh model under `cfg`
// (seeded by `seed`) and evaluates it on `test`.
CellResult run_cell(const DialogueCorpus& train_corpus,
                    const DialogueCorpus& test_corpus, const KnowledgeBase& kb,
                    const TrainConfig& cfg, std::size_t m, std::uint64_t seed,
                    const AugmentResources& res);

struct StudyConfig {
  std::vector<double> fractions{0.1};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::vector<std::string> variants{"baseline", "dl", "mdtod"};
  double test_fraction = 0.2;
  std::uint64_t split_seed = 0;
  std::size_t max_test_dialogues = 0;  // 0: the whole test split
  std::size_t threads = 1;             // capped by DUALTOD_THREADS
  TrainConfig train;

  OrderedJson to_json() const;
  static StudyConfig from_json(const Json& j);
  void validate() const;  // throws ConfigError
};

struct Split {
  DialogueCorpus train;
  DialogueCorpus test;
};
// Held-out test dialogues chosen by subsample(); the rest form the pool.
Split split_corpus(const DialogueCorpus& corpus, double test_fraction,
                   std::uint64_t seed);

// Every (fraction, seed, variant) cell trained on subsample(pool, fraction,
// seed) and evaluated on the shared test split, plus mean and sample
// standard deviation per (fraction, variant).
OrderedJson run_low_resource_study(const DialogueCorpus& corpus,
                                   const KnowledgeBase& kb,
                                   const StudyConfig& cfg,
                                   const AugmentResources& res);

// Empty string when the report is well formed, else the first problem.
std::string validate_study_report(const Json& report);

}  // namespace dualtod::train
