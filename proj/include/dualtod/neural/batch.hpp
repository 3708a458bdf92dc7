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
#include <cstdint>
#include <span>
#include <vector>

#include "dualtod/dualdata.hpp"
#include "dualtod/neural/vocab.hpp"

namespace dualtod::nn {

// Padded id matrices with masks; valid positions are a prefix of each row.
struct Batch {
  std::size_t rows = 0;
  std::size_t src_len = 0;
  std::size_t tgt_len = 0;
  std::vector<TokenId> src;
  std::vector<std::uint8_t> src_mask;
  std::vector<TokenId> tgt;
  std::vector<std::uint8_t> tgt_mask;
  std::vector<Direction> directions;

  std::span<const TokenId> source(std::size_t r) const;
  std::span<const TokenId> target(std::size_t r) const;
  std::size_t target_tokens() const;
};

Batch make_batch(const std::vector<const TrainingPair*>& pairs,
                 const Vocab& vocab);
Batch make_batch(const std::vector<TrainingPair>& pairs, const Vocab& vocab);

}  // namespace dualtod::nn
