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

#include "dualtod/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "dualtod/error.hpp"
#include "dualtod/rng.hpp"

namespace dualtod {
namespace {

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

std::string require_string(const Json& j, const char* key,
                           const std::string& id, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string())
    throw SchemaError(id, path + key, "missing or non-string field");
  return it->get<std::string>();
}

// Belief and goal values are normalized the same way as utterances.
std::string normalize_value(const std::string& raw) {
  return join(tokenize(raw));
}

BeliefState belief_from_json(const Json& j, const std::string& id,
                             const std::string& path) {
  BeliefState belief;
  if (j.is_null()) return belief;
  if (!j.is_object()) throw SchemaError(id, path, "belief must be an object");
  for (const auto& [domain, slots] : j.items()) {
    if (!slots.is_object())
      throw SchemaError(id, path + "." + domain, "slots must be an object");
    for (const auto& [slot, value] : slots.items()) {
      if (!value.is_string())
        throw SchemaError(id, path + "." + domain + "." + slot,
                          "value must be a string");
      std::string v = normalize_value(value.get<std::string>());
      if (v.empty())
        throw SchemaError(id, path + "." + domain + "." + slot,
                          "empty value");
      belief.set(domain, slot, v);
    }
  }
  return belief;
}

Dialogue dialogue_from_json(const Json& j) {
  Dialogue d;
  if (!j.is_object()) throw SchemaError("?", "", "record must be an object");
  d.dialogue_id = require_string(j, "dialogue_id", "?", "");
  const std::string& id = d.dialogue_id;

  auto domains = j.find("domains");
  if (domains == j.end() || !domains->is_array())
    throw SchemaError(id, "domains", "missing or non-array field");
  for (const auto& dom : *domains) {
    if (!dom.is_string()) throw SchemaError(id, "domains", "non-string entry");
    d.domain_tags.insert(dom.get<std::string>());
  }

  if (auto goal = j.find("goal"); goal != j.end() && !goal->is_null()) {
    if (!goal->is_object()) throw SchemaError(id, "goal", "must be an object");
    for (const auto& [domain, g] : goal->items()) {
      DomainGoal dg;
      const std::string gp = "goal." + domain;
      if (auto inf = g.find("inform"); inf != g.end()) {
        if (!inf->is_object())
          throw SchemaError(id, gp + ".inform", "must be an object");
        for (const auto& [slot, value] : inf->items()) {
          if (!value.is_string())
            throw SchemaError(id, gp + ".inform." + slot, "non-string value");
          dg.inform[slot] = normalize_value(value.get<std::string>());
        }
      }
      if (auto req = g.find("request"); req != g.end()) {
        if (!req->is_array())
          throw SchemaError(id, gp + ".request", "must be an array");
        for (const auto& slot : *req) {
          if (!slot.is_string())
            throw SchemaError(id, gp + ".request", "non-string slot");
          dg.request.insert(slot.get<std::string>());
        }
      }
      d.goal[domain] = std::move(dg);
    }
  }

  auto turns = j.find("turns");
  if (turns == j.end() || !turns->is_array())
    throw SchemaError(id, "turns", "missing or non-array field");
  for (std::size_t t = 0; t < turns->size(); ++t) {
    const Json& tj = (*turns)[t];
    const std::string tp = "turns[" + std::to_string(t) + "].";
    if (!tj.is_object()) throw SchemaError(id, tp, "turn must be an object");
    Turn turn;
    turn.turn_index = t;
    turn.user_utterance = tokenize(require_string(tj, "user", id, tp));
    turn.system_response_delex =
        tokenize(require_string(tj, "response_delex", id, tp));
    turn.system_response_lex =
        tokenize(require_string(tj, "response_lex", id, tp));
    auto belief = tj.find("belief");
    turn.belief = belief_from_json(belief == tj.end() ? Json() : *belief, id,
                                   tp + "belief");
    d.turns.push_back(std::move(turn));
  }
  return d;
}

}  // namespace

// ---- schema ----------------------------------------------------------------

OntologySchema OntologySchema::from_json(const Json& j) {
  OntologySchema schema;
  auto domains = j.find("domains");
  if (domains == j.end() || !domains->is_object())
    throw ParseError(0, "schema needs a 'domains' object");
  for (const auto& [name, dj] : domains->items()) {
    DomainSchema ds;
    if (auto s = dj.find("slots"); s != dj.end())
      ds.slots = s->get<std::vector<std::string>>();
    if (auto r = dj.find("requestables"); r != dj.end())
      ds.requestables = r->get<std::vector<std::string>>();
    schema.domains[name] = std::move(ds);
  }
  return schema;
}

OntologySchema OntologySchema::load(const std::filesystem::path& path) {
  return from_json(read_json_file(path));
}

OrderedJson OntologySchema::to_json() const {
  OrderedJson domains = OrderedJson::object();
  for (const auto& [name, ds] : this->domains) {
    domains[name] = {{"slots", ds.slots}, {"requestables", ds.requestables}};
  }
  return {{"domains", domains}};
}

bool OntologySchema::has_domain(const std::string& domain) const {
  return domains.count(domain) != 0;
}

bool OntologySchema::has_slot(const std::string& domain,
                              const std::string& slot) const {
  auto it = domains.find(domain);
  return it != domains.end() && contains(it->second.slots, slot);
}

bool OntologySchema::has_requestable(const std::string& domain,
                                     const std::string& slot) const {
  auto it = domains.find(domain);
  return it != domains.end() && contains(it->second.requestables, slot);
}

bool OntologySchema::knows_placeholder_slot(const std::string& slot) const {
  for (const auto& [_, ds] : domains) {
    if (contains(ds.slots, slot) || contains(ds.requestables, slot))
      return true;
  }
  return false;
}

// ---- corpus ----------------------------------------------------------------

std::size_t DialogueCorpus::total_turns() const {
  std::size_t n = 0;
  for (const auto& d : dialogues) n += d.turns.size();
  return n;
}

void validate_dialogue(const Dialogue& d, const OntologySchema& schema) {
  const std::string& id = d.dialogue_id;
  if (id.empty()) throw SchemaError("?", "dialogue_id", "empty id");
  if (d.turns.empty()) throw SchemaError(id, "turns", "no turns");

  std::set<std::string> seen_domains;
  for (std::size_t t = 0; t < d.turns.size(); ++t) {
    const Turn& turn = d.turns[t];
    const std::string tp = "turns[" + std::to_string(t) + "]";
    if (turn.turn_index != t)
      throw SchemaError(id, tp + ".turn_index", "turn indices must be 0..T-1");
    for (const auto& [domain, slots] : turn.belief.entries) {
      if (!schema.has_domain(domain))
        throw SchemaError(id, tp + ".belief." + domain, "unknown domain");
      for (const auto& [slot, value] : slots) {
        if (!schema.has_slot(domain, slot))
          throw SchemaError(id, tp + ".belief." + domain + "." + slot,
                            "unknown slot");
      }
      seen_domains.insert(domain);
    }
    for (const auto& tok : turn.system_response_delex) {
      if (is_placeholder(tok) &&
          !schema.knows_placeholder_slot(std::string(placeholder_slot(tok))))
        throw SchemaError(id, tp + ".response_delex",
                          "placeholder " + tok + " names no schema slot");
    }
  }
  for (const auto& [domain, g] : d.goal) {
    if (!schema.has_domain(domain))
      throw SchemaError(id, "goal." + domain, "unknown domain");
    for (const auto& [slot, _] : g.inform) {
      if (!schema.has_slot(domain, slot))
        throw SchemaError(id, "goal." + domain + ".inform." + slot,
                          "unknown slot");
    }
    for (const auto& slot : g.request) {
      if (!schema.has_requestable(domain, slot))
        throw SchemaError(id, "goal." + domain + ".request",
                          "unknown requestable " + slot);
    }
    seen_domains.insert(domain);
  }
  if (seen_domains != d.domain_tags)
    throw SchemaError(id, "domains",
                      "tags differ from the domains used in beliefs and goal");
}

DialogueCorpus parse_corpus(const std::string& jsonl,
                            const OntologySchema& schema) {
  DialogueCorpus corpus;
  corpus.schema = schema;
  std::unordered_set<std::string> ids;
  std::istringstream in(jsonl);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw ParseError(line_no, e.what());
    }
    Dialogue d = dialogue_from_json(j);
    validate_dialogue(d, schema);
    if (!ids.insert(d.dialogue_id).second)
      throw SchemaError(d.dialogue_id, "dialogue_id", "duplicate id");
    corpus.dialogues.push_back(std::move(d));
  }
  return corpus;
}

DialogueCorpus load_corpus(const std::filesystem::path& path,
                           const OntologySchema& schema) {
  return parse_corpus(read_file(path), schema);
}

OrderedJson dialogue_to_json(const Dialogue& d) {
  OrderedJson j = OrderedJson::object();
  j["dialogue_id"] = d.dialogue_id;
  j["domains"] = std::vector<std::string>(d.domain_tags.begin(),
                                          d.domain_tags.end());
  OrderedJson goal = OrderedJson::object();
  for (const auto& [domain, g] : d.goal) {
    OrderedJson inform = OrderedJson::object();
    for (const auto& [k, v] : g.inform) inform[k] = v;
    goal[domain] = {{"inform", inform},
                    {"request", std::vector<std::string>(g.request.begin(),
                                                         g.request.end())}};
  }
  j["goal"] = goal;
  OrderedJson turns = OrderedJson::array();
  for (const auto& t : d.turns) {
    OrderedJson belief = OrderedJson::object();
    for (const auto& [domain, slots] : t.belief.entries) {
      OrderedJson s = OrderedJson::object();
      for (const auto& [k, v] : slots) s[k] = v;
      belief[domain] = s;
    }
    turns.push_back({{"user", join(t.user_utterance)},
                     {"response_delex", join(t.system_response_delex)},
                     {"response_lex", join(t.system_response_lex)},
                     {"belief", belief}});
  }
  j["turns"] = turns;
  return j;
}

std::string corpus_to_jsonl(const DialogueCorpus& corpus) {
  std::string out;
  for (const auto& d : corpus.dialogues) {
    out += dialogue_to_json(d).dump();
    out.push_back('\n');
  }
  return out;
}

void fill_db(DialogueCorpus& corpus, const KnowledgeBase& kb) {
  for (auto& d : corpus.dialogues)
    for (auto& t : d.turns) t.db = query(kb, t.belief);
}

Context build_context(const Dialogue& dialogue, std::size_t t) {
  if (t >= dialogue.turns.size())
    throw PreconditionError("turn index " + std::to_string(t) +
                            " out of range for " + dialogue.dialogue_id);
  Context ctx;
  for (std::size_t i = 0; i < t; ++i) {
    ctx.segments.push_back({Speaker::kUser, dialogue.turns[i].user_utterance});
    ctx.segments.push_back(
        {Speaker::kSystem, dialogue.turns[i].system_response_delex});
  }
  ctx.segments.push_back({Speaker::kUser, dialogue.turns[t].user_utterance});
  return ctx;
}

// ---- delexicalization ------------------------------------------------------

Tokens delexicalize(const Tokens& response_lex, const BeliefState& belief,
                    const EntityRow* entity) {
  // value tokens -> placeholder; the first registration of a value wins.
  std::vector<std::pair<Tokens, std::string>> values;
  auto add = [&](const std::string& slot, const std::string& value) {
    Tokens v = split_ws(value);
    if (v.empty()) return;
    for (const auto& existing : values)
      if (existing.first == v) return;
    values.emplace_back(std::move(v), make_placeholder(slot));
  };
  for (const auto& [domain, slots] : belief.entries)
    for (const auto& [slot, value] : slots) add(slot, value);
  if (entity)
    for (const auto& [attr, value] : *entity) add(attr, value);
  if (values.empty()) return response_lex;

  // best[i]: optimal output for the suffix starting at i, scored by
  // (covered tokens desc, spans asc, output lexicographic asc).
  const std::size_t n = response_lex.size();
  struct Best {
    std::size_t covered = 0;
    std::size_t spans = 0;
    Tokens out;
  };
  auto better = [](const Best& a, const Best& b) {
    if (a.covered != b.covered) return a.covered > b.covered;
    if (a.spans != b.spans) return a.spans < b.spans;
    return a.out < b.out;
  };
  std::vector<Best> best(n + 1);
  for (std::size_t i = n; i-- > 0;) {
    Best keep = best[i + 1];
    keep.out.insert(keep.out.begin(), response_lex[i]);
    Best chosen = std::move(keep);
    for (const auto& [v, ph] : values) {
      if (i + v.size() > n) continue;
      if (!std::equal(v.begin(), v.end(), response_lex.begin() + i)) continue;
      Best rep = best[i + v.size()];
      rep.covered += v.size();
      rep.spans += 1;
      rep.out.insert(rep.out.begin(), ph);
      if (better(rep, chosen)) chosen = std::move(rep);
    }
    best[i] = std::move(chosen);
  }
  return best[0].out;
}

// ---- subsampling -----------------------------------------------------------

DialogueCorpus subsample(const DialogueCorpus& corpus, double fraction,
                         std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw PreconditionError("fraction must lie in (0, 1]");
  const std::size_t n = corpus.dialogues.size();
  const auto k = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(n) - 1e-9));

  std::vector<std::pair<std::uint64_t, std::size_t>> keyed;
  keyed.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& id = corpus.dialogues[i].dialogue_id;
    keyed.emplace_back(mix_seed(seed, hash_string(id)), i);
  }
  std::sort(keyed.begin(), keyed.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return corpus.dialogues[a.second].dialogue_id <
           corpus.dialogues[b.second].dialogue_id;
  });
  std::vector<std::size_t> chosen;
  for (std::size_t i = 0; i < k && i < n; ++i) chosen.push_back(keyed[i].second);
  std::sort(chosen.begin(), chosen.end());

  DialogueCorpus out;
  out.schema = corpus.schema;
  for (std::size_t i : chosen) out.dialogues.push_back(corpus.dialogues[i]);
  return out;
}

}  // namespace dualtod
