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

#include "dualtod/generator.hpp"

#include <algorithm>
#include <set>

#include "dualtod/error.hpp"
#include "dualtod/rng.hpp"

namespace dualtod {
namespace {

std::string fill(const std::string& tmpl, const std::string& value) {
  std::string out = tmpl;
  for (std::size_t pos; (pos = out.find("{v}")) != std::string::npos;)
    out.replace(pos, 3, value);
  return out;
}

std::string fill_noun(std::string tmpl, const DomainSpec& spec) {
  for (std::size_t pos; (pos = tmpl.find("{a}")) != std::string::npos;)
    tmpl.replace(pos, 3, spec.article);
  for (std::size_t pos; (pos = tmpl.find("{noun}")) != std::string::npos;)
    tmpl.replace(pos, 6, spec.noun);
  return tmpl;
}

std::string digits(Rng& rng, int n) {
  std::string s;
  for (int i = 0; i < n; ++i) s.push_back(static_cast<char>('0' + rng.below(10)));
  return s;
}

std::string requestable_value(const std::string& slot, Rng& rng) {
  static const std::vector<std::string> kStreets = {
      "regent", "mill", "king", "trinity", "hills", "station", "bridge"};
  static const std::vector<std::string> kFees = {"free", "2 pounds",
                                                 "5 pounds", "4 pounds"};
  if (slot == "phone") return "01223" + digits(rng, 6);
  if (slot == "postcode") {
    std::string pc = "cb" + digits(rng, 1) + digits(rng, 1);
    pc.push_back(static_cast<char>('a' + rng.below(26)));
    pc.push_back(static_cast<char>('a' + rng.below(26)));
    return pc;
  }
  if (slot == "address")
    return std::to_string(1 + rng.below(98)) + " " + rng.pick(kStreets) +
           " street";
  if (slot == "fee") return rng.pick(kFees);
  return slot + digits(rng, 3);
}

// Lexicalizes placeholders from the entity first, then the belief.
Tokens lexicalize(const Tokens& delex, const EntityRow* entity,
                  const SlotValues& domain_belief) {
  Tokens out;
  for (const auto& tok : delex) {
    if (!is_placeholder(tok)) {
      out.push_back(tok);
      continue;
    }
    std::string slot(placeholder_slot(tok));
    const std::string* value = nullptr;
    if (entity) {
      auto it = entity->find(slot);
      if (it != entity->end()) value = &it->second;
    }
    if (!value) {
      auto it = domain_belief.find(slot);
      if (it != domain_belief.end()) value = &it->second;
    }
    if (value) {
      for (auto& v : split_ws(*value)) out.push_back(std::move(v));
    } else {
      out.push_back(tok);
    }
  }
  return out;
}

const std::vector<std::string> kInformTemplates = {
    "i am looking for {a} {noun} {p} .",
    "i need {a} {noun} {p} .",
    "can you help me find {a} {noun} {p} ?",
    "i would like to find {a} {noun} {p} .",
};
const std::vector<std::string> kRetryTemplates = {
    "that 's too bad . how about one {p} ?",
    "okay , what about one {p} instead ?",
};
const std::vector<std::string> kRequestTemplates = {
    "can you give me the {r} ?",
    "what is the {r} of that {noun} ?",
    "could you tell me the {r} please ?",
};
const std::vector<std::string> kCloseTemplates = {
    "thank you , goodbye .",
    "thanks , that is all i need .",
    "great , thank you for your help .",
};
const std::vector<std::string> kFillerTemplates = {
    "is there anything else i should know about it ?",
};
const std::vector<std::string> kNoMatchResponses = {
    "i am sorry , there is no {noun} {p} . would you like to try something "
    "else ?",
    "unfortunately i can not find any {noun} {p} . shall i try another "
    "option ?",
};
const std::vector<std::string> kMatchResponses = {
    "[value_name] is {a} {noun} {p} . would you like to know more ?",
    "i found [value_name] , {a} {noun} {p} . can i help with anything else ?",
};
const std::vector<std::string> kRequestResponses = {
    "the {r} is [value_{s}] .",
    "sure , its {r} is [value_{s}] .",
    "of course , the {r} of [value_name] is [value_{s}] .",
};
const std::vector<std::string> kCloseResponses = {
    "you are welcome . goodbye !",
    "glad i could help . have a nice day !",
    "thank you for using our service . goodbye .",
};
const std::vector<std::string> kFillerResponses = {
    "no , that is all i know about [value_name] .",
};

std::string replace_all(std::string s, const std::string& from,
                        const std::string& to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos;
       pos += to.size())
    s.replace(pos, from.size(), to);
  return s;
}

struct Segment {
  std::string domain;
  SlotValues goal;
  std::vector<std::string> request;
  std::optional<std::pair<std::string, std::string>> detour;  // slot, value
};

class DialogueBuilder {
 public:
  DialogueBuilder(const GeneratorConfig& cfg, const KnowledgeBase& kb, Rng& rng)
      : cfg_(cfg), kb_(kb), rng_(rng) {}

  Dialogue build(const std::string& id) {
    Dialogue d;
    d.dialogue_id = id;
    std::vector<Segment> segments = plan();
    for (const auto& seg : segments) {
      DomainGoal g;
      g.inform = seg.goal;
      g.request.insert(seg.request.begin(), seg.request.end());
      d.goal[seg.domain] = g;
      d.domain_tags.insert(seg.domain);
    }
    for (std::size_t i = 0; i < segments.size(); ++i)
      emit_segment(segments[i], filler_[i], d);
    emit_close(d);
    return d;
  }

 private:
  std::string user_phrase(const std::string& domain, const std::string& slot,
                          const std::string& value) {
    const auto& spec = cfg_.domains.at(domain).informable.at(slot);
    return fill(rng_.pick(spec.user_phrases), value);
  }

  std::string system_phrase(const std::string& domain, const std::string& slot,
                            const std::string& value) {
    return fill(cfg_.domains.at(domain).informable.at(slot).system_phrase,
                value);
  }

  std::vector<Segment> plan() {
    const std::size_t target =
        cfg_.min_turns + rng_.below(cfg_.max_turns - cfg_.min_turns + 1);
    std::size_t k = 1;
    const std::size_t max_k =
        std::min({cfg_.max_domains_per_dialogue, cfg_.domains.size(),
                  cfg_.max_turns - 1});
    while (k < max_k && rng_.bernoulli(cfg_.multi_domain_prob)) ++k;

    std::vector<std::string> names;
    for (const auto& [name, _] : cfg_.domains) names.push_back(name);
    rng_.shuffle(names);
    names.resize(k);
    // Alphabetical segment order keeps the current domain active under the
    // KB rule (last constrained domain in canonical order).
    std::sort(names.begin(), names.end());

    std::vector<Segment> segs;
    std::size_t budget = target > k + 1 ? target - (k + 1) : 0;
    for (const auto& name : names) {
      const DomainSpec& spec = cfg_.domains.at(name);
      const auto& rows = kb_.rows(name);
      const EntityRow& row = rows[rng_.below(rows.size())];
      std::vector<std::string> slots;
      for (const auto& [slot, _] : spec.informable) slots.push_back(slot);
      rng_.shuffle(slots);
      std::size_t c = 1 + rng_.below(std::min(spec.max_constraints, slots.size()));
      slots.resize(c);
      Segment seg;
      seg.domain = name;
      for (const auto& s : slots) seg.goal[s] = row.at(s);

      if (budget > 0 && rng_.bernoulli(cfg_.detour_prob)) {
        std::string slot = rng_.pick(slots);
        std::vector<std::string> alts = spec.informable.at(slot).values;
        rng_.shuffle(alts);
        for (const auto& alt : alts) {
          if (alt == seg.goal[slot]) continue;
          BeliefState probe;
          for (const auto& [s, v] : seg.goal) probe.set(name, s, v);
          probe.set(name, slot, alt);
          if (query(kb_, probe).match_count == 0) {
            seg.detour = std::make_pair(slot, alt);
            --budget;
            break;
          }
        }
      }
      segs.push_back(std::move(seg));
    }
    // Spread request turns round-robin; leftovers become filler turns.
    std::vector<std::vector<std::string>> pools;
    for (const auto& seg : segs) {
      std::vector<std::string> pool;
      for (const auto& [slot, _] : cfg_.domains.at(seg.domain).requestables)
        pool.push_back(slot);
      rng_.shuffle(pool);
      pools.push_back(std::move(pool));
    }
    filler_.assign(segs.size(), 0);
    for (std::size_t i = 0; budget > 0; i = (i + 1) % segs.size(), --budget) {
      if (!pools[i].empty()) {
        segs[i].request.push_back(pools[i].back());
        pools[i].pop_back();
      } else {
        ++filler_[i];
      }
    }
    return segs;
  }

  void push_turn(Dialogue& d, const std::string& user, const std::string& sys,
                 const EntityRow* entity, const std::string& domain) {
    Turn t;
    t.turn_index = d.turns.size();
    t.user_utterance = split_ws(user);
    t.system_response_delex = split_ws(sys);
    t.belief = belief_;
    t.db = query(kb_, belief_);
    static const SlotValues kNoSlots;
    auto it = belief_.entries.find(domain);
    t.system_response_lex = lexicalize(
        t.system_response_delex, entity,
        it == belief_.entries.end() ? kNoSlots : it->second);
    d.turns.push_back(std::move(t));
  }

  std::string joined_user_phrases(const std::string& domain,
                                  const SlotValues& slots) {
    std::string out;
    for (const auto& [slot, value] : slots) {
      if (!out.empty()) out += " and ";
      out += user_phrase(domain, slot, value);
    }
    return out;
  }

  std::string joined_system_phrases(const std::string& domain,
                                    const SlotValues& slots) {
    std::string out;
    for (const auto& [slot, _] : slots) {
      if (!out.empty()) out += " and ";
      out += system_phrase(domain, slot, make_placeholder(slot));
    }
    return out;
  }

  void emit_segment(const Segment& seg, std::size_t fillers, Dialogue& d) {
    const DomainSpec& spec = cfg_.domains.at(seg.domain);
    SlotValues first = seg.goal;
    if (seg.detour) first[seg.detour->first] = seg.detour->second;

    std::string user = replace_all(fill_noun(rng_.pick(kInformTemplates), spec),
                                   "{p}", joined_user_phrases(seg.domain, first));
    for (const auto& [s, v] : first) belief_.set(seg.domain, s, v);

    if (seg.detour) {
      const auto& [slot, value] = *seg.detour;
      std::string sys = replace_all(
          fill_noun(rng_.pick(kNoMatchResponses), spec), "{p}",
          system_phrase(seg.domain, slot, make_placeholder(slot)));
      push_turn(d, user, sys, nullptr, seg.domain);

      const std::string& goal_value = seg.goal.at(slot);
      user = replace_all(rng_.pick(kRetryTemplates), "{p}",
                         user_phrase(seg.domain, slot, goal_value));
      belief_.set(seg.domain, slot, goal_value);
    }

    DBResult db = query(kb_, belief_);
    const EntityRow* entity = db.selected ? &*db.selected : nullptr;
    std::string sys =
        replace_all(fill_noun(rng_.pick(kMatchResponses), spec), "{p}",
                    joined_system_phrases(seg.domain, seg.goal));
    push_turn(d, user, sys, entity, seg.domain);

    for (const auto& slot : seg.request) {
      const std::string& said = spec.requestables.at(slot);
      std::string u = replace_all(fill_noun(rng_.pick(kRequestTemplates), spec),
                                  "{r}", said);
      std::string s = replace_all(
          replace_all(rng_.pick(kRequestResponses), "{r}", said), "{s}", slot);
      push_turn(d, u, s, entity, seg.domain);
    }
    for (std::size_t i = 0; i < fillers; ++i)
      push_turn(d, rng_.pick(kFillerTemplates), rng_.pick(kFillerResponses),
                entity, seg.domain);
    last_domain_ = seg.domain;
    last_entity_ = db.selected;
  }

  void emit_close(Dialogue& d) {
    const EntityRow* entity = last_entity_ ? &*last_entity_ : nullptr;
    push_turn(d, rng_.pick(kCloseTemplates), rng_.pick(kCloseResponses),
              entity, last_domain_);
  }

  const GeneratorConfig& cfg_;
  const KnowledgeBase& kb_;
  Rng& rng_;
  BeliefState belief_;
  std::vector<std::size_t> filler_;
  std::string last_domain_;
  std::optional<EntityRow> last_entity_;
};

}  // namespace

// ---- config ----------------------------------------------------------------

GeneratorConfig GeneratorConfig::from_json(const Json& j) {
  GeneratorConfig cfg;
  cfg.domains.clear();
  try {
    cfg.num_dialogues = j.value("num_dialogues", cfg.num_dialogues);
    cfg.min_turns = j.value("min_turns", cfg.min_turns);
    cfg.max_turns = j.value("max_turns", cfg.max_turns);
    cfg.max_domains_per_dialogue =
        j.value("max_domains_per_dialogue", cfg.max_domains_per_dialogue);
    cfg.multi_domain_prob = j.value("multi_domain_prob", cfg.multi_domain_prob);
    cfg.detour_prob = j.value("detour_prob", cfg.detour_prob);
    cfg.kb_seed = j.value("kb_seed", cfg.kb_seed);
    cfg.id_prefix = j.value("id_prefix", cfg.id_prefix);
    for (const auto& [name, dj] : j.at("domains").items()) {
      DomainSpec ds;
      ds.noun = dj.at("noun").get<std::string>();
      ds.article = dj.value("article", ds.article);
      ds.kb_rows = dj.value("kb_rows", ds.kb_rows);
      ds.max_constraints = dj.value("max_constraints", ds.max_constraints);
      ds.name_first = dj.at("name_first").get<std::vector<std::string>>();
      ds.name_second = dj.at("name_second").get<std::vector<std::string>>();
      ds.requestables =
          dj.at("requestables").get<std::map<std::string, std::string>>();
      for (const auto& [slot, sj] : dj.at("informable").items()) {
        SlotSpec ss;
        ss.values = sj.at("values").get<std::vector<std::string>>();
        ss.user_phrases = sj.at("user_phrases").get<std::vector<std::string>>();
        ss.system_phrase = sj.at("system_phrase").get<std::string>();
        ds.informable[slot] = std::move(ss);
      }
      cfg.domains[name] = std::move(ds);
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("generator config: ") + e.what());
  }
  return cfg;
}

OrderedJson GeneratorConfig::to_json() const {
  OrderedJson doms = OrderedJson::object();
  for (const auto& [name, ds] : domains) {
    OrderedJson inf = OrderedJson::object();
    for (const auto& [slot, ss] : ds.informable) {
      inf[slot] = {{"values", ss.values},
                   {"user_phrases", ss.user_phrases},
                   {"system_phrase", ss.system_phrase}};
    }
    OrderedJson req = OrderedJson::object();
    for (const auto& [k, v] : ds.requestables) req[k] = v;
    doms[name] = {{"noun", ds.noun},
                  {"article", ds.article},
                  {"kb_rows", ds.kb_rows},
                  {"max_constraints", ds.max_constraints},
                  {"name_first", ds.name_first},
                  {"name_second", ds.name_second},
                  {"requestables", req},
                  {"informable", inf}};
  }
  return {{"num_dialogues", num_dialogues},
          {"min_turns", min_turns},
          {"max_turns", max_turns},
          {"max_domains_per_dialogue", max_domains_per_dialogue},
          {"multi_domain_prob", multi_domain_prob},
          {"detour_prob", detour_prob},
          {"kb_seed", kb_seed},
          {"id_prefix", id_prefix},
          {"domains", doms}};
}

void GeneratorConfig::validate() const {
  if (domains.size() < 2)
    throw ConfigError("generator config must name at least 2 domains");
  if (min_turns < 2 || max_turns < min_turns)
    throw ConfigError("need 2 <= min_turns <= max_turns");
  if (max_domains_per_dialogue < 1)
    throw ConfigError("max_domains_per_dialogue must be >= 1");
  if (multi_domain_prob < 0 || multi_domain_prob > 1 || detour_prob < 0 ||
      detour_prob > 1)
    throw ConfigError("probabilities must lie in [0, 1]");
  for (const auto& [name, ds] : domains) {
    if (ds.informable.empty())
      throw ConfigError("domain " + name + " has no informable slots");
    if (ds.kb_rows == 0) throw ConfigError("domain " + name + " has no rows");
    if (ds.max_constraints == 0)
      throw ConfigError("domain " + name + ": max_constraints must be >= 1");
    if (ds.name_first.empty() || ds.name_second.empty())
      throw ConfigError("domain " + name + " needs name parts");
    if (ds.name_first.size() * ds.name_second.size() < ds.kb_rows)
      throw ConfigError("domain " + name + ": too few names for kb_rows");
    for (const auto& [slot, ss] : ds.informable) {
      if (ss.values.empty() || ss.user_phrases.empty() ||
          ss.system_phrase.empty())
        throw ConfigError("slot " + name + "." + slot + " is incomplete");
      if (slot == "name" || ds.requestables.count(slot))
        throw ConfigError("slot " + name + "." + slot + " is reserved");
    }
  }
}

GeneratorConfig default_generator_config() {
  GeneratorConfig cfg;
  const std::vector<std::string> areas = {"centre", "north", "south", "east",
                                          "west"};
  const std::vector<std::string> prices = {"cheap", "moderate", "expensive"};
  const std::map<std::string, std::string> requests = {
      {"address", "address"}, {"phone", "phone number"},
      {"postcode", "postcode"}};

  DomainSpec restaurant;
  restaurant.noun = "restaurant";
  restaurant.informable["food"] = {
      {"chinese", "indian", "italian", "british", "french", "north indian",
       "thai", "korean"},
      {"serving {v} food", "that serves {v} food"},
      "serving {v} food"};
  restaurant.informable["area"] = {
      areas, {"in the {v}", "in the {v} area"}, "in the {v}"};
  restaurant.informable["pricerange"] = {
      prices, {"in the {v} price range", "that is {v}"},
      "in the {v} price range"};
  restaurant.requestables = requests;
  restaurant.kb_rows = 30;
  restaurant.name_first = {"golden", "royal", "little", "red", "blue", "old"};
  restaurant.name_second = {"dragon", "kitchen", "garden", "table", "spoon",
                            "lantern"};

  DomainSpec hotel;
  hotel.noun = "hotel";
  hotel.informable["area"] = {areas, {"in the {v}", "in the {v} area"},
                              "in the {v}"};
  hotel.informable["pricerange"] = {
      prices, {"in the {v} price range", "that is {v}"},
      "in the {v} price range"};
  hotel.informable["stars"] = {{"2", "3", "4", "5"},
                               {"with {v} stars", "rated {v} stars"},
                               "with {v} stars"};
  hotel.requestables = requests;
  hotel.kb_rows = 24;
  hotel.name_first = {"city", "park", "river", "grand", "acorn", "alpha"};
  hotel.name_second = {"lodge", "house", "inn", "suites", "court"};

  DomainSpec attraction;
  attraction.noun = "attraction";
  attraction.article = "an";
  attraction.informable["area"] = {areas, {"in the {v}", "in the {v} area"},
                                   "in the {v}"};
  attraction.informable["type"] = {
      {"museum", "park", "theatre", "college", "gallery"},
      {"that is a {v}", "of type {v}"},
      "that is a {v}"};
  attraction.requestables = {{"address", "address"},
                             {"fee", "entrance fee"},
                             {"phone", "phone number"}};
  attraction.kb_rows = 24;
  attraction.name_first = {"castle", "fitzroy", "byard", "kettle", "wandle",
                           "saint"};
  attraction.name_second = {"hall", "yard", "studio", "gardens", "works"};

  cfg.domains["attraction"] = std::move(attraction);
  cfg.domains["hotel"] = std::move(hotel);
  cfg.domains["restaurant"] = std::move(restaurant);
  return cfg;
}

OntologySchema schema_for(const GeneratorConfig& cfg) {
  OntologySchema schema;
  for (const auto& [name, ds] : cfg.domains) {
    DomainSchema s;
    for (const auto& [slot, _] : ds.informable) s.slots.push_back(slot);
    s.slots.push_back("name");
    std::sort(s.slots.begin(), s.slots.end());
    for (const auto& [slot, _] : ds.requestables) s.requestables.push_back(slot);
    schema.domains[name] = std::move(s);
  }
  return schema;
}

KnowledgeBase build_kb(const GeneratorConfig& cfg) {
  cfg.validate();
  std::map<std::string, std::vector<EntityRow>> tables;
  for (const auto& [name, ds] : cfg.domains) {
    Rng rng(mix_seed(cfg.kb_seed, hash_string(name)));
    std::vector<std::string> names;
    for (const auto& a : ds.name_first)
      for (const auto& b : ds.name_second) names.push_back(a + " " + b);
    rng.shuffle(names);
    auto& rows = tables[name];
    for (std::size_t i = 0; i < ds.kb_rows; ++i) {
      EntityRow row;
      row["name"] = names[i];
      for (const auto& [slot, ss] : ds.informable) row[slot] = rng.pick(ss.values);
      for (const auto& [slot, _] : ds.requestables)
        row[slot] = requestable_value(slot, rng);
      rows.push_back(std::move(row));
    }
  }
  return KnowledgeBase(std::move(tables));
}

DialogueCorpus generate_synthetic(const GeneratorConfig& cfg,
                                  std::uint64_t seed) {
  cfg.validate();
  const KnowledgeBase kb = build_kb(cfg);
  DialogueCorpus corpus;
  corpus.schema = schema_for(cfg);
  for (std::size_t i = 0; i < cfg.num_dialogues; ++i) {
    Rng rng(mix_seed(seed, i));
    std::string id = std::to_string(i);
    id = cfg.id_prefix + std::string(id.size() < 5 ? 5 - id.size() : 0, '0') + id;
    DialogueBuilder builder(cfg, kb, rng);
    corpus.dialogues.push_back(builder.build(id));
  }
  return corpus;
}

}  // namespace dualtod
