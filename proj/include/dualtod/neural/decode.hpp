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

#include "dualtod/kb.hpp"
#include "dualtod/neural/model.hpp"
#include "dualtod/neural/vocab.hpp"
#include "dualtod/rng.hpp"

namespace dualtod::nn {

// Decoders never emit <pad>. Outputs include the final <eos> when one was
// produced.

std::vector<TokenId> greedy_decode(const Seq2SeqModel& model,
                                   std::span<const TokenId> src,
                                   std::size_t max_len);

struct Hypothesis {
  std::vector<TokenId> tokens;
  double log_prob = 0.0;  // sum over tokens
  double score = 0.0;     // log_prob / length (0 for an empty hypothesis)
};

// Length-normalized beam search. Each step keeps the `width` best
// expansions; expansions ending in <eos> leave the beam as finished.
Hypothesis beam_decode(const Seq2SeqModel& model, std::span<const TokenId> src,
                       std::size_t width, std::size_t max_len);

// Smallest prefix of the probability-sorted ids (ties by id) whose mass
// reaches p.
std::vector<std::size_t> nucleus(std::span<const double> probs, double p);

// Draws one id from the renormalized nucleus of `probs`.
std::size_t sample_nucleus(std::span<const double> probs, double p, Rng& rng);

std::vector<TokenId> top_p_decode(const Seq2SeqModel& model,
                                  std::span<const TokenId> src, double p,
                                  std::uint64_t seed, std::size_t max_len);

// Sum of log p(token | prefix) over `tokens`, following the decoder
// conventions used for generation.
double score_sequence(const Seq2SeqModel& model, std::span<const TokenId> src,
                      std::span<const TokenId> tokens);

struct InferResult {
  BeliefState belief;
  DBResult db;
  Tokens response;  // without <resp> and <eos>
  Tokens output;    // full decoder stream, spliced DB tokens included
};

// Decodes the belief up to <db>, queries `kb` with the parsed belief and
// forces `<db> [bucket] <resp>` into the stream before decoding the response.
InferResult two_phase_infer(const Seq2SeqModel& model, const Vocab& vocab,
                            const Tokens& input, const KnowledgeBase& kb,
                            std::size_t max_len = 200);

}  // namespace dualtod::nn
