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

namespace dualtod {

// FWD: context -> belief, DB bucket and response in one target sequence.
// B2C: dialogue state -> user utterance. R2C: response -> user utterance.
enum class Direction { kFwd, kB2C, kR2C };

inline constexpr Direction kAllDirections[] = {Direction::kFwd, Direction::kB2C,
                                               Direction::kR2C};

std::string to_string(Direction d);  // "fwd" | "b2c" | "r2c"
Direction parse_direction(const std::string& s);
std::string task_token(Direction d);  // "<task:fwd>" ...

namespace markers {
inline constexpr const char* kUser = "<usr>";
inline constexpr const char* kSystem = "<sys>";
inline constexpr const char* kBelief = "<bs>";
inline constexpr const char* kResponse = "<resp>";
inline constexpr const char* kEos = "<eos>";
}  // namespace markers

struct TrainingPair {
  Direction direction = Direction::kFwd;
  Tokens input;
  Tokens target;
  std::string dialogue_id;
  std::size_t t = 0;
  std::size_t j = 0;

  friend bool operator==(const TrainingPair&, const TrainingPair&) = default;
};

// Maximum input / output lengths in tokens; longer contexts lose their oldest
// segments first, longer targets are cut before `<eos>`.
inline constexpr std::size_t kMaxInputLen = 512;
inline constexpr std::size_t kMaxOutputLen = 200;

Tokens flatten_context(const Context& c);

TrainingPair make_forward_pair(const Context& c, const DialogueState& s,
                               const Tokens& response);
TrainingPair make_b2c_pair(const DialogueState& s, const Tokens& user);
TrainingPair make_r2c_pair(const Tokens& response, const Tokens& user);

// The FWD input with only its final user segment replaced.
Context with_final_user(const Context& c, const Tokens& user);

struct TrainingSet {
  std::vector<TrainingPair> pairs;
  std::size_t shortfall_turns = 0;  // turns that produced fewer than m rewrites
  std::vector<ParaphraseSet> audit;  // user/response rewrite sets, in order
  std::vector<std::pair<std::string, std::size_t>> audit_keys;  // (id, t)
};

// Order: dialogue, then t, then j, then direction (FWD, B2C, R2C). Turn DB
// results are recomputed from `kb`. Augmentation seeds derive from
// (seed, dialogue_id, t) so results do not depend on iteration order.
TrainingSet build_training_set(const DialogueCorpus& corpus,
                               const KnowledgeBase& kb, std::size_t m,
                               Strategy strategy, std::uint64_t seed,
                               const AugmentResources& res);

OrderedJson pair_to_json(const TrainingPair& p);
TrainingPair pair_from_json(const Json& j);
std::string pairs_to_jsonl(const std::vector<TrainingPair>& pairs);
std::vector<TrainingPair> pairs_from_jsonl(const std::string& text);

}  // namespace dualtod
