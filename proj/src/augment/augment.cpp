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

#include "dualtod/augment.hpp"

#include <algorithm>
#include <set>

#include "dualtod/error.hpp"
#include "dualtod/rng.hpp"

namespace dualtod {
namespace {

bool is_marker(const std::string& tok) {
  return tok.size() >= 3 && tok.front() == '<' && tok.back() == '>';
}

// Positions that rewriting must leave alone, plus which token boundaries lie
// inside a protected span (nothing may be inserted there).
struct Protection {
  std::vector<bool> frozen;
  std::vector<bool> inner_boundary;  // boundary before token i

  bool any_free() const {
    return std::find(frozen.begin(), frozen.end(), false) != frozen.end();
  }
};

Protection protect(const Tokens& tokens, const ConstraintSet& constraints) {
  const std::size_t n = tokens.size();
  Protection p{std::vector<bool>(n, false), std::vector<bool>(n + 1, false)};
  for (std::size_t i = 0; i < n; ++i)
    if (is_placeholder(tokens[i]) || is_marker(tokens[i])) p.frozen[i] = true;
  for (const auto& value : constraints.values) {
    for (std::size_t start : find_spans(tokens, value)) {
      for (std::size_t i = start; i < start + value.size(); ++i)
        p.frozen[i] = true;
      for (std::size_t b = start + 1; b < start + value.size(); ++b)
        p.inner_boundary[b] = true;
    }
  }
  return p;
}

bool span_free(const Protection& p, std::size_t pos, std::size_t len) {
  for (std::size_t i = pos; i < pos + len; ++i)
    if (p.frozen[i]) return false;
  return true;
}

struct Hyp {
  Tokens out;
  double score = 0.0;
  bool changed = false;
  std::uint64_t tie = 0;
};

void append(Hyp& h, const Tokens& toks, const FluencyTable& lm) {
  for (const auto& t : toks) {
    h.score += lm.logp(h.out.empty() ? "<s>" : h.out.back(), t);
    h.out.push_back(t);
  }
}

void prune(std::vector<Hyp>& bucket, std::size_t width, std::uint64_t seed) {
  for (auto& h : bucket) h.tie = mix_seed(seed, hash_string(join(h.out)));
  std::sort(bucket.begin(), bucket.end(), [](const Hyp& a, const Hyp& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.tie != b.tie) return a.tie < b.tie;
    return a.out < b.out;
  });
  std::vector<Hyp> kept;
  std::set<Tokens> seen;
  for (auto& h : bucket) {
    if (kept.size() >= width) break;
    if (seen.insert(h.out).second) kept.push_back(std::move(h));
  }
  bucket = std::move(kept);
}

// Positions in [0, n) whose token starts at least one usable thesaurus entry.
std::vector<std::size_t> rewritable_positions(const Tokens& tokens,
                                              const Protection& prot,
                                              const Thesaurus& th) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (prot.frozen[i]) continue;
    for (const auto& [len, _] : th.matches_at(tokens, i)) {
      if (span_free(prot, i, len)) {
        out.push_back(i);
        break;
      }
    }
  }
  return out;
}

// Replaces the thesaurus entry at `pos` with a random alternative.
Tokens substitute_at(const Tokens& tokens, std::size_t pos,
                     const Protection& prot, const Thesaurus& th, Rng& rng,
                     std::size_t* consumed = nullptr) {
  std::vector<std::pair<std::size_t, const std::vector<Tokens>*>> usable;
  for (const auto& m : th.matches_at(tokens, pos))
    if (span_free(prot, pos, m.first)) usable.push_back(m);
  const auto& [len, alts] = usable[rng.below(usable.size())];
  if (consumed) *consumed = len;
  return (*alts)[rng.below(alts->size())];
}

}  // namespace

void ConstraintSet::add(const Tokens& value) {
  if (value.empty()) return;
  if (std::find(values.begin(), values.end(), value) == values.end())
    values.push_back(value);
}

ConstraintSet constraints_in(const Tokens& text,
                             const std::vector<std::string>& candidates) {
  ConstraintSet out;
  for (const auto& c : candidates) {
    Tokens v = split_ws(c);
    if (!v.empty() && contains_span(text, v)) out.add(v);
  }
  return out;
}

bool constraint_check(const Tokens& candidate,
                      const ConstraintSet& constraints) {
  for (const auto& v : constraints.values)
    if (!contains_span(candidate, v)) return false;
  return true;
}

std::vector<Tokens> paraphrase(const Tokens& utterance,
                               const ConstraintSet& constraints, std::size_t k,
                               std::uint64_t seed,
                               const AugmentResources& res) {
  if (k == 0) throw PreconditionError("paraphrase: beam width must be at least 1");
  const std::size_t n = utterance.size();
  if (n == 0) return {};
  const Protection prot = protect(utterance, constraints);
  if (!prot.any_free()) return {};

  const std::size_t width = std::max<std::size_t>(4 * k, 16);
  std::vector<std::vector<Hyp>> buckets(n + 1);
  buckets[0].push_back(Hyp{});
  for (std::size_t i = 0; i < n; ++i) {
    prune(buckets[i], width, seed);
    for (const Hyp& h : buckets[i]) {
      Hyp keep = h;
      append(keep, {utterance[i]}, res.fluency);
      buckets[i + 1].push_back(std::move(keep));
      if (prot.frozen[i]) continue;
      for (const auto& [len, alts] : res.thesaurus.matches_at(utterance, i)) {
        if (!span_free(prot, i, len)) continue;
        for (const auto& alt : *alts) {
          Hyp rw = h;
          rw.changed = true;
          append(rw, alt, res.fluency);
          buckets[i + len].push_back(std::move(rw));
        }
      }
    }
    buckets[i].clear();
  }

  std::vector<Hyp>& finals = buckets[n];
  for (auto& h : finals) {
    h.score += res.fluency.logp(h.out.back(), "</s>");
    // Length-normalized so shorter rewrites are not favoured by default.
    h.score /= static_cast<double>(h.out.size() + 1);
  }
  prune(finals, finals.size(), seed);

  std::vector<Tokens> out;
  for (auto& h : finals) {
    if (out.size() >= k) break;
    if (!h.changed || h.out == utterance) continue;
    if (!constraint_check(h.out, constraints)) continue;
    out.push_back(std::move(h.out));
  }
  return out;
}

Tokens eda(const Tokens& utterance, const ConstraintSet& constraints,
           std::uint64_t seed, const AugmentResources& res, double alpha) {
  Rng rng(seed);
  const Protection prot = protect(utterance, constraints);
  std::vector<std::size_t> free_pos;
  for (std::size_t i = 0; i < utterance.size(); ++i)
    if (!prot.frozen[i]) free_pos.push_back(i);
  const auto syn_pos =
      rewritable_positions(utterance, prot, res.thesaurus);

  enum Op { kSwap, kDelete, kInsert, kSubstitute };
  std::vector<Op> ops = {kSwap, kDelete, kInsert, kSubstitute};
  rng.shuffle(ops);
  for (Op op : ops) {
    switch (op) {
      case kSwap: {
        if (free_pos.size() < 2) break;
        std::size_t a = rng.below(free_pos.size());
        std::size_t b = rng.below(free_pos.size() - 1);
        if (b >= a) ++b;
        if (utterance[free_pos[a]] == utterance[free_pos[b]]) break;
        Tokens out = utterance;
        std::swap(out[free_pos[a]], out[free_pos[b]]);
        return out;
      }
      case kDelete: {
        // Keep at least one token overall.
        if (free_pos.empty() || utterance.size() < 2) break;
        std::vector<bool> drop(utterance.size(), false);
        std::size_t dropped = 0;
        for (std::size_t i : free_pos)
          if (rng.bernoulli(alpha)) drop[i] = true, ++dropped;
        if (dropped == 0) drop[free_pos[rng.below(free_pos.size())]] = true, ++dropped;
        if (dropped >= utterance.size()) break;
        Tokens out;
        for (std::size_t i = 0; i < utterance.size(); ++i)
          if (!drop[i]) out.push_back(utterance[i]);
        return out;
      }
      case kInsert: {
        if (syn_pos.empty()) break;
        std::size_t src = syn_pos[rng.below(syn_pos.size())];
        Tokens alt = substitute_at(utterance, src, prot, res.thesaurus, rng);
        std::vector<std::size_t> slots;
        for (std::size_t b = 0; b <= utterance.size(); ++b)
          if (!prot.inner_boundary[b]) slots.push_back(b);
        std::size_t at = slots[rng.below(slots.size())];
        Tokens out(utterance.begin(),
                   utterance.begin() + static_cast<std::ptrdiff_t>(at));
        out.insert(out.end(), alt.begin(), alt.end());
        out.insert(out.end(),
                   utterance.begin() + static_cast<std::ptrdiff_t>(at),
                   utterance.end());
        return out;
      }
      case kSubstitute: {
        if (syn_pos.empty()) break;
        std::size_t pos = syn_pos[rng.below(syn_pos.size())];
        std::size_t len = 0;
        Tokens alt = substitute_at(utterance, pos, prot, res.thesaurus, rng, &len);
        Tokens out(utterance.begin(),
                   utterance.begin() + static_cast<std::ptrdiff_t>(pos));
        out.insert(out.end(), alt.begin(), alt.end());
        out.insert(out.end(),
                   utterance.begin() + static_cast<std::ptrdiff_t>(pos + len),
                   utterance.end());
        return out;
      }
    }
  }
  return utterance;
}

Tokens synonym_replace(const Tokens& utterance,
                       const ConstraintSet& constraints, std::uint64_t seed,
                       const AugmentResources& res, double p) {
  Rng rng(seed);
  const Protection prot = protect(utterance, constraints);
  Tokens out;
  for (std::size_t i = 0; i < utterance.size();) {
    bool usable = false;
    if (!prot.frozen[i]) {
      for (const auto& [len, _] : res.thesaurus.matches_at(utterance, i))
        if (span_free(prot, i, len)) usable = true;
    }
    if (usable && rng.bernoulli(p)) {
      std::size_t len = 0;
      Tokens alt = substitute_at(utterance, i, prot, res.thesaurus, rng, &len);
      out.insert(out.end(), alt.begin(), alt.end());
      i += len;
    } else {
      out.push_back(utterance[i]);
      ++i;
    }
  }
  return out;
}

ParaphraseSet rewrite(const Tokens& text, const ConstraintSet& constraints,
                      std::size_t m, Strategy strategy, std::uint64_t seed,
                      const AugmentResources& res) {
  ParaphraseSet set;
  set.original = text;
  set.strategy = strategy;
  set.constraints = constraints;
  if (m == 0) return set;
  if (strategy == Strategy::kPara) {
    set.variants = paraphrase(text, constraints, m, seed, res);
    return set;
  }
  std::set<Tokens> seen = {text};
  const std::size_t attempts = 10 * m + 10;
  for (std::size_t a = 0; a < attempts && set.variants.size() < m; ++a) {
    std::uint64_t s = mix_seed(seed, a);
    Tokens v = strategy == Strategy::kEda ? eda(text, constraints, s, res)
                                          : synonym_replace(text, constraints, s, res);
    if (v.empty() || !constraint_check(v, constraints)) continue;
    if (seen.insert(v).second) set.variants.push_back(std::move(v));
  }
  return set;
}

TurnExpansion expand_turn(const Turn& turn, const DialogueState& state,
                          std::size_t m, Strategy strategy, std::uint64_t seed,
                          const AugmentResources& res) {
  const std::vector<std::string> belief_values = state.belief.values();
  ConstraintSet user_c = constraints_in(turn.user_utterance, belief_values);
  ConstraintSet resp_c =
      constraints_in(turn.system_response_delex, belief_values);
  for (const auto& tok : turn.system_response_delex)
    if (is_placeholder(tok)) resp_c.add({tok});

  TurnExpansion ex;
  ex.user_set = rewrite(turn.user_utterance, user_c, m, strategy,
                        mix_seed(seed, 1), res);
  ex.response_set = rewrite(turn.system_response_delex, resp_c, m, strategy,
                            mix_seed(seed, 2), res);
  ex.pairs.push_back({turn.user_utterance, turn.system_response_delex});
  const std::size_t n = std::min(
      {m, ex.user_set.variants.size(), ex.response_set.variants.size()});
  for (std::size_t j = 0; j < n; ++j)
    ex.pairs.push_back({ex.user_set.variants[j], ex.response_set.variants[j]});
  ex.shortfall = m + 1 - ex.pairs.size();
  return ex;
}

OrderedJson paraphrase_set_to_json(const ParaphraseSet& set,
                                   const std::string& dialogue_id,
                                   std::size_t t, const std::string& field) {
  OrderedJson constraints = OrderedJson::array();
  for (const auto& c : set.constraints.values) constraints.push_back(join(c));
  OrderedJson variants = OrderedJson::array();
  for (const auto& v : set.variants) variants.push_back(join(v));
  return {{"id", dialogue_id},        {"t", t},
          {"field", field},           {"strategy", to_string(set.strategy)},
          {"original", join(set.original)}, {"constraints", constraints},
          {"variants", variants}};
}

}  // namespace dualtod
