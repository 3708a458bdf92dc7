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

#include "dualtod/dualdata.hpp"

#include <sstream>

#include "dualtod/error.hpp"
#include "dualtod/rng.hpp"

namespace dualtod {
namespace {

void append(Tokens& dst, const Tokens& src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

Tokens finish_target(Tokens body) {
  if (body.size() > kMaxOutputLen - 1) body.resize(kMaxOutputLen - 1);
  body.emplace_back(markers::kEos);
  return body;
}

Tokens state_tokens(const DialogueState& s) {
  Tokens out = serialize_belief(s.belief);
  append(out, encode_db(s.db));
  return out;
}

}  // namespace

std::string to_string(Direction d) {
  switch (d) {
    case Direction::kFwd: return "fwd";
    case Direction::kB2C: return "b2c";
    case Direction::kR2C: return "r2c";
  }
  return "fwd";
}

Direction parse_direction(const std::string& s) {
  if (s == "fwd") return Direction::kFwd;
  if (s == "b2c") return Direction::kB2C;
  if (s == "r2c") return Direction::kR2C;
  throw ParseError(0, "unknown direction '" + s + "'");
}

std::string task_token(Direction d) { return "<task:" + to_string(d) + ">"; }

Tokens flatten_context(const Context& c) {
  // Drop whole leading segments until the flattened form fits.
  std::size_t first = 0;
  auto length_from = [&](std::size_t k) {
    std::size_t n = 1;  // task token
    for (std::size_t i = k; i < c.segments.size(); ++i)
      n += 1 + c.segments[i].tokens.size();
    return n;
  };
  while (first + 1 < c.segments.size() && length_from(first) > kMaxInputLen)
    ++first;
  Tokens out;
  for (std::size_t i = first; i < c.segments.size(); ++i) {
    const auto& seg = c.segments[i];
    out.emplace_back(seg.speaker == Speaker::kUser ? markers::kUser
                                                   : markers::kSystem);
    append(out, seg.tokens);
  }
  if (out.size() > kMaxInputLen - 1)
    out.erase(out.begin(),
              out.begin() + static_cast<std::ptrdiff_t>(out.size() - (kMaxInputLen - 1)));
  return out;
}

TrainingPair make_forward_pair(const Context& c, const DialogueState& s,
                               const Tokens& response) {
  TrainingPair p;
  p.direction = Direction::kFwd;
  p.input.push_back(task_token(Direction::kFwd));
  append(p.input, flatten_context(c));
  Tokens body{markers::kBelief};
  append(body, state_tokens(s));
  body.emplace_back(markers::kResponse);
  append(body, response);
  p.target = finish_target(std::move(body));
  return p;
}

TrainingPair make_b2c_pair(const DialogueState& s, const Tokens& user) {
  TrainingPair p;
  p.direction = Direction::kB2C;
  p.input.push_back(task_token(Direction::kB2C));
  append(p.input, state_tokens(s));
  p.target = finish_target(user);
  return p;
}

TrainingPair make_r2c_pair(const Tokens& response, const Tokens& user) {
  TrainingPair p;
  p.direction = Direction::kR2C;
  p.input.push_back(task_token(Direction::kR2C));
  append(p.input, response);
  if (p.input.size() > kMaxInputLen) p.input.resize(kMaxInputLen);
  p.target = finish_target(user);
  return p;
}

Context with_final_user(const Context& c, const Tokens& user) {
  Context out = c;
  out.segments.back().tokens = user;
  return out;
}

TrainingSet build_training_set(const DialogueCorpus& corpus,
                               const KnowledgeBase& kb, std::size_t m,
                               Strategy strategy, std::uint64_t seed,
                               const AugmentResources& res) {
  TrainingSet set;
  for (const auto& d : corpus.dialogues) {
    for (std::size_t t = 0; t < d.turns.size(); ++t) {
      const Turn& turn = d.turns[t];
      DialogueState state{turn.belief, query(kb, turn.belief)};
      const Context ctx = build_context(d, t);
      TurnExpansion ex = expand_turn(turn, state, m, strategy,
                                     derive_seed(seed, d.dialogue_id, t, 0), res);
      if (ex.shortfall > 0) ++set.shortfall_turns;
      if (m > 0) {
        set.audit.push_back(std::move(ex.user_set));
        set.audit_keys.emplace_back(d.dialogue_id, t);
        set.audit.push_back(std::move(ex.response_set));
        set.audit_keys.emplace_back(d.dialogue_id, t);
      }
      for (std::size_t j = 0; j < ex.pairs.size(); ++j) {
        const VariantPair& v = ex.pairs[j];
        TrainingPair fwd =
            make_forward_pair(with_final_user(ctx, v.user), state, v.response);
        TrainingPair b2c = make_b2c_pair(state, v.user);
        TrainingPair r2c = make_r2c_pair(v.response, v.user);
        for (TrainingPair* p : {&fwd, &b2c, &r2c}) {
          p->dialogue_id = d.dialogue_id;
          p->t = t;
          p->j = j;
          set.pairs.push_back(std::move(*p));
        }
      }
    }
  }
  return set;
}

OrderedJson pair_to_json(const TrainingPair& p) {
  return {{"dir", to_string(p.direction)},
          {"id", p.dialogue_id},
          {"t", p.t},
          {"j", p.j},
          {"input", join(p.input)},
          {"target", join(p.target)}};
}

TrainingPair pair_from_json(const Json& j) {
  TrainingPair p;
  p.direction = parse_direction(j.at("dir").get<std::string>());
  p.dialogue_id = j.at("id").get<std::string>();
  p.t = j.at("t").get<std::size_t>();
  p.j = j.at("j").get<std::size_t>();
  p.input = split_ws(j.at("input").get<std::string>());
  p.target = split_ws(j.at("target").get<std::string>());
  return p;
}

std::string pairs_to_jsonl(const std::vector<TrainingPair>& pairs) {
  std::string out;
  for (const auto& p : pairs) {
    out += pair_to_json(p).dump();
    out.push_back('\n');
  }
  return out;
}

std::vector<TrainingPair> pairs_from_jsonl(const std::string& text) {
  std::vector<TrainingPair> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(pair_from_json(Json::parse(line)));
    } catch (const Json::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return out;
}

}  // namespace dualtod
