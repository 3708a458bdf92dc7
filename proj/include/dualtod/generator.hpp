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
#include <map>
#include <string>
#include <vector>

#include "dualtod/corpus.hpp"
#include "dualtod/io.hpp"
#include "dualtod/kb.hpp"

namespace dualtod {

// Phrase templates use `{v}` for the slot value.
struct SlotSpec {
  std::vector<std::string> values;
  std::vector<std::string> user_phrases;
  std::string system_phrase;
};

struct DomainSpec {
  std::string noun;
  std::string article = "a";
  std::map<std::string, SlotSpec> informable;
  // requestable slot -> how users say it ("phone" -> "phone number")
  std::map<std::string, std::string> requestables;
  std::size_t kb_rows = 24;
  std::size_t max_constraints = 2;
  std::vector<std::string> name_first;
  std::vector<std::string> name_second;
};

struct GeneratorConfig {
  std::size_t num_dialogues = 200;
  std::size_t min_turns = 3;
  std::size_t max_turns = 6;
  std::size_t max_domains_per_dialogue = 2;
  double multi_domain_prob = 0.3;
  double detour_prob = 0.3;
  std::uint64_t kb_seed = 1;
  std::string id_prefix = "syn";
  std::map<std::string, DomainSpec> domains;

  static GeneratorConfig from_json(const Json& j);
  OrderedJson to_json() const;
  // Throws ConfigError.
  void validate() const;
};

// Three domains (attraction, hotel, restaurant) with MultiWOZ-like slots.
GeneratorConfig default_generator_config();

OntologySchema schema_for(const GeneratorConfig& cfg);

// Entity tables are a function of the config alone (cfg.kb_seed).
KnowledgeBase build_kb(const GeneratorConfig& cfg);

// Deterministic for a fixed (cfg, seed). Turn::db is filled against
// build_kb(cfg).
DialogueCorpus generate_synthetic(const GeneratorConfig& cfg,
                                  std::uint64_t seed);

}  // namespace dualtod
