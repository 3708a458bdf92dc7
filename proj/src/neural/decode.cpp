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

#include "dualtod/neural/decode.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dualtod/dualdata.hpp"
#include "dualtod/error.hpp"

namespace dualtod::nn {
namespace {

std::size_t argmax_non_pad(const std::vector<double>& logp) {
  std::size_t best = 1;
  for (std::size_t j = 2; j < logp.size(); ++j)
    if (logp[j] > logp[best]) best = j;
  return best;
}

// Decoder position budget: the <pad> start symbol takes one slot.
std::size_t clamp_len(const Seq2SeqModel& model, std::size_t max_len) {
  return std::min(max_len, model.config().max_positions - 1);
}

}  // namespace

std::vector<TokenId> greedy_decode(const Seq2SeqModel& model,
                                   std::span<const TokenId> src,
                                   std::size_t max_len) {
  max_len = clamp_len(model, max_len);
  std::vector<TokenId> out;
  if (max_len == 0) return out;
  const auto enc = model.encode(src);
  std::vector<TokenId> prefix{Vocab::kPad};
  while (out.size() < max_len) {
    const auto logp = model.next_log_probs(enc, prefix);
    const auto next = static_cast<TokenId>(argmax_non_pad(logp));
    out.push_back(next);
    prefix.push_back(next);
    if (next == Vocab::kEos) break;
  }
  return out;
}

Hypothesis beam_decode(const Seq2SeqModel& model, std::span<const TokenId> src,
                       std::size_t width, std::size_t max_len) {
  if (width == 0) throw PreconditionError("beam width must be >= 1");
  max_len = clamp_len(model, max_len);
  Hypothesis best;
  if (max_len == 0) return best;
  const auto enc = model.encode(src);

  struct Beam {
    std::vector<TokenId> tokens;
    double log_prob = 0.0;
  };
  std::vector<Beam> alive{Beam{}};
  std::vector<Beam> finished;

  for (std::size_t step = 0; step < max_len && !alive.empty(); ++step) {
    std::vector<Beam> cand;
    for (const Beam& b : alive) {
      std::vector<TokenId> prefix{Vocab::kPad};
      prefix.insert(prefix.end(), b.tokens.begin(), b.tokens.end());
      const auto logp = model.next_log_probs(enc, prefix);
      for (std::size_t j = 1; j < logp.size(); ++j) {
        Beam c{b.tokens, b.log_prob + logp[j]};
        c.tokens.push_back(static_cast<TokenId>(j));
        cand.push_back(std::move(c));
      }
    }
    // Equal lengths within a step, so raw and normalized ranking agree.
    std::stable_sort(cand.begin(), cand.end(), [](const Beam& a, const Beam& b) {
      return a.log_prob > b.log_prob;
    });
    if (cand.size() > width) cand.resize(width);
    alive.clear();
    for (Beam& c : cand) {
      if (c.tokens.back() == Vocab::kEos || step + 1 == max_len)
        finished.push_back(std::move(c));
      else
        alive.push_back(std::move(c));
    }
  }

  bool have = false;
  for (const Beam& f : finished) {
    const double score = f.log_prob / static_cast<double>(f.tokens.size());
    if (!have || score > best.score) {
      best.tokens = f.tokens;
      best.log_prob = f.log_prob;
      best.score = score;
      have = true;
    }
  }
  return best;
}

std::vector<std::size_t> nucleus(std::span<const double> probs, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw PreconditionError("top-p must be in (0, 1]");
  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return probs[a] > probs[b];
  });
  std::vector<std::size_t> keep;
  double mass = 0.0;
  for (std::size_t id : order) {
    keep.push_back(id);
    mass += probs[id];
    if (mass >= p) break;
  }
  return keep;
}

std::size_t sample_nucleus(std::span<const double> probs, double p, Rng& rng) {
  const auto keep = nucleus(probs, p);
  double mass = 0.0;
  for (std::size_t id : keep) mass += probs[id];
  double u = rng.uniform() * mass;
  for (std::size_t id : keep) {
    u -= probs[id];
    if (u < 0.0) return id;
  }
  return keep.back();
}

std::vector<TokenId> top_p_decode(const Seq2SeqModel& model,
                                  std::span<const TokenId> src, double p,
                                  std::uint64_t seed, std::size_t max_len) {
  if (!(p > 0.0 && p <= 1.0)) throw PreconditionError("top-p must be in (0, 1]");
  max_len = clamp_len(model, max_len);
  std::vector<TokenId> out;
  if (max_len == 0) return out;
  Rng rng(seed);
  const auto enc = model.encode(src);
  std::vector<TokenId> prefix{Vocab::kPad};
  while (out.size() < max_len) {
    const auto logp = model.next_log_probs(enc, prefix);
    std::vector<double> probs(logp.size());
    double z = 0.0;
    for (std::size_t j = 1; j < logp.size(); ++j) z += std::exp(logp[j]);
    for (std::size_t j = 1; j < logp.size(); ++j) probs[j] = std::exp(logp[j]) / z;
    const auto next = static_cast<TokenId>(sample_nucleus(probs, p, rng));
    out.push_back(next);
    prefix.push_back(next);
    if (next == Vocab::kEos) break;
  }
  return out;
}

double score_sequence(const Seq2SeqModel& model, std::span<const TokenId> src,
                      std::span<const TokenId> tokens) {
  const auto enc = model.encode(src);
  std::vector<TokenId> prefix{Vocab::kPad};
  double total = 0.0;
  for (TokenId t : tokens) {
    total += model.next_log_probs(enc, prefix)[static_cast<std::size_t>(t)];
    prefix.push_back(t);
  }
  return total;
}

InferResult two_phase_infer(const Seq2SeqModel& model, const Vocab& vocab,
                            const Tokens& input, const KnowledgeBase& kb,
                            std::size_t max_len) {
  max_len = clamp_len(model, max_len);
  InferResult r;
  const auto src = vocab.encode(input);
  const auto enc = model.encode(src);
  const TokenId db_id = vocab.id(kDbMarker);
  std::vector<TokenId> prefix{Vocab::kPad};
  auto emitted = [&] { return prefix.size() - 1; };

  // Phase 1: belief span.
  Tokens belief_span;
  bool ended = false;
  while (emitted() < max_len) {
    const auto next = static_cast<TokenId>(
        argmax_non_pad(model.next_log_probs(enc, prefix)));
    if (next == db_id) break;
    prefix.push_back(next);
    if (next == Vocab::kEos) {
      ended = true;
      break;
    }
    belief_span.push_back(vocab.token(next));
  }
  r.belief = parse_belief(belief_span);
  r.db = query(kb, r.belief);

  // Splice the live DB result, replacing whatever the model would emit.
  if (ended) prefix.pop_back();
  Tokens splice = encode_db(r.db);
  splice.push_back(markers::kResponse);
  for (const auto& tok : splice) prefix.push_back(vocab.id(tok));

  // Phase 2: response.
  while (emitted() < max_len + splice.size() &&
         prefix.size() < model.config().max_positions) {
    const auto next = static_cast<TokenId>(
        argmax_non_pad(model.next_log_probs(enc, prefix)));
    prefix.push_back(next);
    if (next == Vocab::kEos) break;
    r.response.push_back(vocab.token(next));
  }
  for (std::size_t i = 1; i < prefix.size(); ++i)
    r.output.push_back(vocab.token(prefix[i]));
  return r;
}

}  // namespace dualtod::nn
