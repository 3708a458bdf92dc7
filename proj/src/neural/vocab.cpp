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

#include "dualtod/neural/vocab.hpp"

#include <algorithm>
#include <map>

#include "dualtod/error.hpp"
#include "dualtod/kb.hpp"

namespace dualtod::nn {

const std::vector<std::string>& Vocab::reserved_tokens() {
  static const std::vector<std::string> kReserved = [] {
    std::vector<std::string> r = {"<pad>", "<eos>", "<unk>"};
    for (Direction d : kAllDirections) r.push_back(task_token(d));
    for (const char* m : {markers::kUser, markers::kSystem, markers::kBelief,
                          kDbMarker, markers::kResponse})
      r.emplace_back(m);
    r.emplace_back(kNoneToken);
    for (DbBucket b : {DbBucket::kNone, DbBucket::kZero, DbBucket::kOne,
                       DbBucket::kTwo, DbBucket::kThreePlus})
      r.push_back(bucket_token(b));
    return r;
  }();
  return kReserved;
}

Vocab::Vocab() {
  for (const auto& t : reserved_tokens()) add(t);
}

Vocab::Vocab(const std::vector<std::string>& tokens) {
  for (const auto& t : tokens) {
    if (index_.count(t)) throw ParseError(0, "duplicate vocab token " + t);
    add(t);
  }
  for (const auto& t : reserved_tokens())
    if (!index_.count(t)) throw ParseError(0, "vocab lacks reserved " + t);
  if (tokens_.empty() || tokens_[kPad] != "<pad>" || tokens_[kEos] != "<eos>" ||
      tokens_[kUnk] != "<unk>")
    throw ParseError(0, "vocab must start with <pad> <eos> <unk>");
}

void Vocab::add(const std::string& token) {
  if (index_.count(token)) return;
  index_[token] = static_cast<TokenId>(tokens_.size());
  tokens_.push_back(token);
}

Vocab Vocab::build(const std::vector<TrainingPair>& pairs,
                   std::size_t min_count,
                   const std::vector<std::string>& extra_reserved) {
  if (pairs.empty()) throw PreconditionError("build_vocab needs pairs");
  Vocab v;
  for (const auto& t : extra_reserved) v.add(t);
  std::map<std::string, std::size_t> counts;
  for (const auto& p : pairs) {
    for (const auto& t : p.input) ++counts[t];
    for (const auto& t : p.target) ++counts[t];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [tok, n] : counts)
    if (n >= min_count && !v.contains(tok)) ranked.emplace_back(tok, n);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  for (const auto& [tok, _] : ranked) v.add(tok);
  return v;
}

TokenId Vocab::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

bool Vocab::contains(const std::string& token) const {
  return index_.count(token) != 0;
}

const std::string& Vocab::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size())
    return tokens_[kUnk];
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<TokenId> Vocab::encode(const Tokens& tokens) const {
  std::vector<TokenId> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

Tokens Vocab::decode(const std::vector<TokenId>& ids) const {
  Tokens out;
  out.reserve(ids.size());
  for (TokenId i : ids) out.push_back(token(i));
  return out;
}

}  // namespace dualtod::nn
