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

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "dualtod/dualdata.hpp"
#include "dualtod/text.hpp"

namespace dualtod::nn {

using TokenId = int;

class Vocab {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kEos = 1;
  static constexpr TokenId kUnk = 2;

  Vocab();  // reserved tokens only
  explicit Vocab(const std::vector<std::string>& tokens);  // id order given

  // Reserved tokens first, then tokens seen >= min_count times ordered by
  // frequency (descending) and then lexicographically.
  static Vocab build(const std::vector<TrainingPair>& pairs,
                     std::size_t min_count = 1,
                     const std::vector<std::string>& extra_reserved = {});

  // Fixed special tokens: <pad> <eos> <unk>, task tokens, structural
  // markers, [none] and the DB bucket tokens.
  static const std::vector<std::string>& reserved_tokens();

  TokenId id(const std::string& token) const;  // kUnk if absent
  bool contains(const std::string& token) const;
  const std::string& token(TokenId id) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::vector<TokenId> encode(const Tokens& tokens) const;
  Tokens decode(const std::vector<TokenId>& ids) const;

  friend bool operator==(const Vocab& a, const Vocab& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  void add(const std::string& token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

}  // namespace dualtod::nn
