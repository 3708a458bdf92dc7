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
#include "dualtod/io.hpp"
#include "dualtod/kb.hpp"
#include "dualtod/train/train.hpp"

namespace dualtod::eval {

struct DomainSplit {
  DialogueCorpus train;     // dialogues that never touch the holdout domain
  DialogueCorpus holdout;   // dialogues tagged with the holdout domain
  std::size_t train_holdout_turns = 0;  // audit; must be 0
};

// A dialogue touches a domain when it is tagged with it or any turn's
// belief constrains it. Throws PreconditionError when the holdout domain is
// absent or when no training dialogue remains.
DomainSplit split_by_domain(const DialogueCorpus& corpus, const std::string& holdout);

struct CrossDomainConfig {
  std::string holdout;
  std::vector<std::size_t> ms{0, 1, 2};
  std::uint64_t seed = 1;
  std::size_t max_train_dialogues = 0;  // 0: all
  std::size_t max_eval_dialogues = 0;   // 0: all
  std::size_t threads = 1;              // capped by DUALTOD_THREADS
  train::TrainConfig train;             // the mdtod switches are applied per m

  OrderedJson to_json() const;
  static CrossDomainConfig from_json(const Json& j);
};

// Leave-one-domain-out: for each m trains the dual model with m rewrites on
// the non-holdout dialogues and reports Goal Score and BLEU on the holdout
// dialogues, one row per m.
OrderedJson cross_domain_eval(const DialogueCorpus& corpus, const KnowledgeBase& kb,
                              const CrossDomainConfig& cfg,
                              const AugmentResources& res);

std::string validate_cross_domain_report(const Json& report);

}  // namespace dualtod::eval
