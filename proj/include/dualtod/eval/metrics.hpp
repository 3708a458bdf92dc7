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

#include <map>
#include <set>
#include <string>
#include <vector>

#include "dualtod/belief.hpp"
#include "dualtod/corpus.hpp"
#include "dualtod/io.hpp"
#include "dualtod/kb.hpp"
#include "dualtod/text.hpp"

namespace dualtod::eval {

// Fraction of turns whose predicted belief equals the gold belief exactly.
// Throws PreconditionError on a length mismatch; 0 for no turns.
double jga(const std::vector<BeliefState>& predicted,
           const std::vector<BeliefState>& gold);

// Corpus BLEU-4 in [0, 100] over case-folded tokens, without smoothing.
// Orders longer than every hypothesis are dropped from the mean.
// Throws PreconditionError on a length mismatch or an empty corpus.
double bleu(const std::vector<Tokens>& hypotheses,
            const std::vector<Tokens>& references);

struct OfferedEntity {
  std::string domain;
  EntityRow row;
};

// What the system did over one dialogue.
struct DialogueOutcome {
  std::vector<OfferedEntity> offered;
  std::set<std::string> provided_slots;  // from `[value_<slot>]` placeholders
};

struct InformSuccess {
  double inform = 0.0;   // percent
  double success = 0.0;  // percent
};

// Inform: every goal domain with inform constraints has an offered entity
// in that domain whose row satisfies all of them. Success: informed and every
// requested slot appears as a placeholder in some response. Dialogues
// without goals count as informed and successful.
InformSuccess inform_success(const std::vector<DialogueOutcome>& outcomes,
                             const std::vector<Goal>& goals);

double combined(double inform, double success, double bleu);
double goal_score(double inform, double success);

struct MetricsReport {
  double inform = 0.0;
  double success = 0.0;
  double bleu = 0.0;
  double combined = 0.0;
  double jga = 0.0;
  double goal_score = 0.0;
  std::size_t dialogues = 0;
  std::size_t turns = 0;
  OrderedJson meta = OrderedJson::object();

  OrderedJson to_json() const;
  static MetricsReport from_json(const Json& j);
};

// Empty string when `j` is a valid MetricsReport, else the first problem.
std::string validate_metrics_json(const Json& j);

}  // namespace dualtod::eval
