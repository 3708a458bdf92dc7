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

#include <string>
#include <vector>

#include "dualtod/corpus.hpp"
#include "dualtod/eval/metrics.hpp"
#include "dualtod/kb.hpp"
#include "dualtod/neural/model.hpp"
#include "dualtod/neural/vocab.hpp"

namespace dualtod::eval {

struct TurnPrediction {
  std::string dialogue_id;
  std::size_t t = 0;
  BeliefState belief;
  DBResult db;
  Tokens response;
};

struct Evaluation {
  MetricsReport report;
  std::vector<TurnPrediction> predictions;
};

// Runs two-phase inference on every turn with the gold dialogue history as
// context and scores belief (JGA), responses (BLEU against the delexicalized
// reference) and dialogue goals (Inform/Success). A response containing
// `[value_name]` offers the entity selected by that turn's DB query.
Evaluation evaluate_model(const nn::Seq2SeqModel& model, const nn::Vocab& vocab,
                          const DialogueCorpus& corpus, const KnowledgeBase& kb,
                          std::size_t max_len = 200);

OrderedJson predictions_to_json(const std::vector<TurnPrediction>& predictions);

}  // namespace dualtod::eval
