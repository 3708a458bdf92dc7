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
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dualtod/corpus.hpp"
#include "dualtod/io.hpp"
#include "dualtod/kb.hpp"
#include "dualtod/text.hpp"

namespace dualtod {

enum class Strategy { kPara, kEda, kSyn };

std::string to_string(Strategy s);       // "para" | "eda" | "syn"
Strategy parse_strategy(const std::string& s);

// Phrase -> alternative phrases. Keys may span several tokens.
class Thesaurus {
 public:
  Thesaurus() = default;
  static Thesaurus from_json(const Json& j);
  static Thesaurus load(const std::filesystem::path& path);

  // Entries whose key starts at `pos`, as (key length, alternatives).
  std::vector<std::pair<std::size_t, const std::vector<Tokens>*>> matches_at(
      const Tokens& tokens, std::size_t pos) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<Tokens, std::vector<Tokens>> entries_;
  std::size_t max_key_len_ = 0;
};

// Bigram log-probabilities with per-history backoff for unseen pairs.
// Sentence boundaries are `<s>` and `</s>`.
class FluencyTable {
 public:
  FluencyTable() = default;
  static FluencyTable from_json(const Json& j);
  static FluencyTable load(const std::filesystem::path& path);

  double logp(const std::string& prev, const std::string& next) const;

 private:
  std::map<std::pair<std::string, std::string>, double> bigrams_;
  std::map<std::string, double> backoff_;
  double default_logp_ = -12.0;
};

struct AugmentResources {
  Thesaurus thesaurus;
  FluencyTable fluency;

  // Loads thesaurus.json and fluency.json from `dir`.
  static AugmentResources load(const std::filesystem::path& dir);
};

// Directory holding the bundled resources: $DUALTOD_DATA if set, otherwise
// the source tree's data/ directory.
std::filesystem::path default_data_dir();

struct ConstraintSet {
  std::vector<Tokens> values;  // deduplicated, non-empty

  void add(const Tokens& value);
  bool empty() const { return values.empty(); }
};

// Keeps only the candidate values that occur in `text`; a value absent from
// the original cannot be preserved by a rewrite.
ConstraintSet constraints_in(const Tokens& text,
                             const std::vector<std::string>& candidates);

bool constraint_check(const Tokens& candidate, const ConstraintSet& constraints);

// Constraint-token lattice rewrite explored by beam search under the fluency
// table. Returns at most k distinct candidates, all different from the input
// and all passing constraint_check, best first. `seed` only breaks score ties.
std::vector<Tokens> paraphrase(const Tokens& utterance,
                               const ConstraintSet& constraints, std::size_t k,
                               std::uint64_t seed,
                               const AugmentResources& res);

// One of {swap, deletion, insertion, synonym substitution}; constraint tokens
// are never moved, deleted or split.
Tokens eda(const Tokens& utterance, const ConstraintSet& constraints,
           std::uint64_t seed, const AugmentResources& res,
           double alpha = 0.1);

// Per-token synonym substitution with probability p.
Tokens synonym_replace(const Tokens& utterance,
                       const ConstraintSet& constraints, std::uint64_t seed,
                       const AugmentResources& res, double p = 0.3);

struct ParaphraseSet {
  Tokens original;
  std::vector<Tokens> variants;  // j = 1..M
  Strategy strategy = Strategy::kPara;
  ConstraintSet constraints;
};

// Up to m distinct constraint-preserving rewrites under one strategy.
ParaphraseSet rewrite(const Tokens& text, const ConstraintSet& constraints,
                      std::size_t m, Strategy strategy, std::uint64_t seed,
                      const AugmentResources& res);

struct VariantPair {
  Tokens user;
  Tokens response;
};

struct TurnExpansion {
  std::vector<VariantPair> pairs;  // j = 0 is the original
  std::size_t shortfall = 0;       // m + 1 - pairs.size()
  ParaphraseSet user_set;
  ParaphraseSet response_set;
};

// Rewrites U_t and the delexicalized R_t of one turn; dialogue history is
// never touched. U_t is constrained by belief values, R_t by belief values and
// its own placeholders.
TurnExpansion expand_turn(const Turn& turn, const DialogueState& state,
                          std::size_t m, Strategy strategy, std::uint64_t seed,
                          const AugmentResources& res);

OrderedJson paraphrase_set_to_json(const ParaphraseSet& set,
                                   const std::string& dialogue_id,
                                   std::size_t t, const std::string& field);

}  // namespace dualtod
