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

#include "dualtod/neural/batch.hpp"

#include <algorithm>
#include <numeric>

namespace dualtod::nn {
namespace {

std::size_t valid_prefix(const std::vector<std::uint8_t>& mask, std::size_t r,
                         std::size_t len) {
  const auto* m = mask.data() + r * len;
  return static_cast<std::size_t>(std::accumulate(m, m + len, std::size_t{0}));
}

}  // namespace

std::span<const TokenId> Batch::source(std::size_t r) const {
  return {src.data() + r * src_len, valid_prefix(src_mask, r, src_len)};
}

std::span<const TokenId> Batch::target(std::size_t r) const {
  return {tgt.data() + r * tgt_len, valid_prefix(tgt_mask, r, tgt_len)};
}

std::size_t Batch::target_tokens() const {
  return static_cast<std::size_t>(
      std::accumulate(tgt_mask.begin(), tgt_mask.end(), std::size_t{0}));
}

Batch make_batch(const std::vector<const TrainingPair*>& pairs,
                 const Vocab& vocab) {
  Batch b;
  b.rows = pairs.size();
  for (const auto* p : pairs) {
    b.src_len = std::max(b.src_len, p->input.size());
    b.tgt_len = std::max(b.tgt_len, p->target.size());
  }
  b.src.assign(b.rows * b.src_len, Vocab::kPad);
  b.src_mask.assign(b.rows * b.src_len, 0);
  b.tgt.assign(b.rows * b.tgt_len, Vocab::kPad);
  b.tgt_mask.assign(b.rows * b.tgt_len, 0);
  for (std::size_t r = 0; r < b.rows; ++r) {
    const TrainingPair& p = *pairs[r];
    for (std::size_t i = 0; i < p.input.size(); ++i) {
      b.src[r * b.src_len + i] = vocab.id(p.input[i]);
      b.src_mask[r * b.src_len + i] = 1;
    }
    for (std::size_t i = 0; i < p.target.size(); ++i) {
      b.tgt[r * b.tgt_len + i] = vocab.id(p.target[i]);
      b.tgt_mask[r * b.tgt_len + i] = 1;
    }
    b.directions.push_back(p.direction);
  }
  return b;
}

Batch make_batch(const std::vector<TrainingPair>& pairs, const Vocab& vocab) {
  std::vector<const TrainingPair*> ptrs;
  for (const auto& p : pairs) ptrs.push_back(&p);
  return make_batch(ptrs, vocab);
}

}  // namespace dualtod::nn
