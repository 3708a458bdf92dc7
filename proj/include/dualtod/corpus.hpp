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
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dualtod/belief.hpp"
#include "dualtod/io.hpp"
#include "dualtod/kb.hpp"
#include "dualtod/text.hpp"

namespace dualtod {

struct DomainSchema {
  std::vector<std::string> slots;
  std::vector<std::string> requestables;
};

struct OntologySchema {
  std::map<std::string, DomainSchema> domains;

  static OntologySchema from_json(const Json& j);
  static OntologySchema load(const std::filesystem::path& path);
  OrderedJson to_json() const;

  bool has_domain(const std::string& domain) const;
  bool has_slot(const std::string& domain, const std::string& slot) const;
  bool has_requestable(const std::string& domain,
                       const std::string& slot) const;
  // True when any domain defines `slot` as informable or requestable.
  bool knows_placeholder_slot(const std::string& slot) const;
};

struct DomainGoal {
  SlotValues inform;
  std::set<std::string> request;

  friend bool operator==(const DomainGoal&, const DomainGoal&) = default;
};

using Goal = std::map<std::string, DomainGoal>;

struct Turn {
  std::size_t turn_index = 0;
  Tokens user_utterance;
  Tokens system_response_delex;
  Tokens system_response_lex;
  BeliefState belief;
  DBResult db;
};

struct Dialogue {
  std::string dialogue_id;
  std::set<std::string> domain_tags;
  std::vector<Turn> turns;
  Goal goal;
};

struct DialogueCorpus {
  std::vector<Dialogue> dialogues;
  OntologySchema schema;

  std::size_t total_turns() const;
};

enum class Speaker { kUser, kSystem };

struct Segment {
  Speaker speaker;
  Tokens tokens;

  friend bool operator==(const Segment&, const Segment&) = default;
};

struct Context {
  std::vector<Segment> segments;

  friend bool operator==(const Context&, const Context&) = default;
};

// ---- ingestion -----------------------------------------------------------

// One dialogue per line. Throws ParseError (with line number) or SchemaError
// (with dialogue id and field path). DB results are left empty; see fill_db.
DialogueCorpus load_corpus(const std::filesystem::path& path,
                           const OntologySchema& schema);
DialogueCorpus parse_corpus(const std::string& jsonl,
                            const OntologySchema& schema);

OrderedJson dialogue_to_json(const Dialogue& d);
std::string corpus_to_jsonl(const DialogueCorpus& corpus);

// Throws SchemaError on the first violated invariant.
void validate_dialogue(const Dialogue& d, const OntologySchema& schema);

// Fills Turn::db from the KB query rule.
void fill_db(DialogueCorpus& corpus, const KnowledgeBase& kb);

// ---- per-turn views ------------------------------------------------------

// [U_0, R_0, ..., U_{t-1}, R_{t-1}, U_t] with delexicalized responses.
Context build_context(const Dialogue& dialogue, std::size_t t);

// Replaces belief values and entity attribute values with `[value_<slot>]`.
// Among all non-overlapping replacements the one covering the most tokens
// wins, then the one using fewer (longer) spans, then the lexicographically
// smallest output.
Tokens delexicalize(const Tokens& response_lex, const BeliefState& belief,
                    const EntityRow* entity);

// ---- sampling ------------------------------------------------------------

// Exactly ceil(fraction * N) whole dialogues, chosen by a seeded ranking of
// dialogue ids, so the result does not depend on input order. Output keeps
// the input order.
DialogueCorpus subsample(const DialogueCorpus& corpus, double fraction,
                         std::uint64_t seed);

}  // namespace dualtod
