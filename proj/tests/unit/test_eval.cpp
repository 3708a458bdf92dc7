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

#include <cmath>

#include "doctest.h"
#include "dualtod/error.hpp"
#include "dualtod/eval/cross_domain.hpp"
#include "dualtod/eval/evaluate.hpp"
#include "dualtod/eval/metrics.hpp"
#include "dualtod/generator.hpp"
#include "dualtod/rng.hpp"

using namespace dualtod;
using namespace dualtod::eval;

namespace {

const std::string kFixtures = DUALTOD_FIXTURE_DIR;

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Clipped n-gram matches by pairwise scanning, no hashing or sorting.
void count_ngrams(const Tokens& h, const Tokens& r, std::size_t n, double& match, double& total) {
  if (h.size() < n) return;
  const std::size_t hn = h.size() - n + 1;
  std::vector<bool> used(r.size() >= n ? r.size() - n + 1 : 0, false);
  for (std::size_t i = 0; i < hn; ++i) {
    total += 1;
    for (std::size_t j = 0; j < used.size(); ++j) {
      if (used[j]) continue;
      bool eq = true;
      for (std::size_t k = 0; k < n && eq; ++k) eq = lower(h[i + k]) == lower(r[j + k]);
      if (eq) {
        used[j] = true;
        match += 1;
        break;
      }
    }
  }
}

double oracle_bleu(const std::vector<Tokens>& hyp, const std::vector<Tokens>& ref) {
  double m[4] = {0, 0, 0, 0}, t[4] = {0, 0, 0, 0}, c = 0, r = 0;
  for (std::size_t s = 0; s < hyp.size(); ++s) {
    c += static_cast<double>(hyp[s].size());
    r += static_cast<double>(ref[s].size());
    for (std::size_t n = 1; n <= 4; ++n) count_ngrams(hyp[s], ref[s], n, m[n - 1], t[n - 1]);
  }
  double prod = 1.0;
  int orders = 0;
  for (int n = 0; n < 4; ++n) {
    if (t[n] == 0) continue;
    if (m[n] == 0) return 0.0;
    prod *= m[n] / t[n];
    ++orders;
  }
  if (orders == 0) return 0.0;
  const double bp = c < r ? std::exp(1.0 - r / c) : 1.0;
  return 100.0 * bp * std::pow(prod, 1.0 / orders);
}

BeliefState belief(std::initializer_list<std::tuple<const char*, const char*, const char*>> e) {
  BeliefState b;
  for (const auto& [d, s, v] : e) b.set(d, s, v);
  return b;
}

}  // namespace

TEST_CASE("combined score arithmetic") {
  const double a = combined(85.65, 62.20, 15.24);
  const double b = combined(82.00, 64.00, 14.48);
  CHECK(a == doctest::Approx(89.165).epsilon(1e-12));
  CHECK(b == doctest::Approx(87.48).epsilon(1e-12));
  CHECK(std::abs(a - 89.16) <= 0.01);
  CHECK(std::abs(b - 87.49) <= 0.01);
  CHECK(goal_score(80.0, 60.0) == 70.0);
}

TEST_CASE("BLEU fixed points") {
  const std::vector<Tokens> h{split_ws("the hotel is in the north ."), split_ws("ok")};
  CHECK(bleu(h, h) == 100.0);
  CHECK(bleu({split_ws("hi")}, {split_ws("hi")}) == 100.0);
  CHECK(bleu({split_ws("a b c")}, {split_ws("x y z")}) == 0.0);
  CHECK(bleu({split_ws("The Hotel")}, {split_ws("the hotel")}) == 100.0);
  CHECK_THROWS_AS(bleu({}, {}), PreconditionError);
  CHECK_THROWS_AS(bleu({{"a"}}, {}), PreconditionError);
  // Brevity: the hypothesis is a strict prefix of the reference.
  const double short_h = bleu({split_ws("a b c d")}, {split_ws("a b c d e f g h")});
  CHECK(short_h == doctest::Approx(100.0 * std::exp(1.0 - 2.0)).epsilon(1e-12));
}

TEST_CASE("BLEU matches a brute-force oracle on random small corpora") {
  Rng rng(99);
  const std::vector<std::string> words{"a", "b", "c", "A", "d", "e"};
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Tokens> hyp, ref;
    for (std::size_t s = 1 + rng.below(4); s > 0; --s) {
      Tokens h, r;
      for (std::size_t k = 1 + rng.below(8); k > 0; --k) h.push_back(rng.pick(words));
      for (std::size_t k = 1 + rng.below(8); k > 0; --k) r.push_back(rng.pick(words));
      hyp.push_back(h);
      ref.push_back(r);
    }
    CHECK(std::abs(bleu(hyp, ref) - oracle_bleu(hyp, ref)) < 1e-9);
  }
}

TEST_CASE("joint goal accuracy") {
  const BeliefState a = belief({{"hotel", "area", "north"}});
  const BeliefState b = belief({{"restaurant", "food", "chinese"}, {"restaurant", "area", "centre"}});
  const BeliefState wrong = belief({{"restaurant", "food", "indian"}, {"restaurant", "area", "centre"}});
  const BeliefState superset = belief({{"hotel", "area", "north"}, {"hotel", "stars", "4"}});
  CHECK(jga({a, b}, {a, b}) == 1.0);
  CHECK(jga({a, wrong}, {a, b}) == 0.5);
  CHECK(jga({superset}, {a}) == 0.0);
  CHECK(jga({BeliefState{}}, {BeliefState{}}) == 1.0);
  CHECK(jga({}, {}) == 0.0);
  CHECK_THROWS_AS(jga({a}, {}), PreconditionError);
}

TEST_CASE("inform and success on twenty hand-scored dialogues") {
  const EntityRow cheap_chinese{{"name", "golden house"}, {"food", "chinese"}, {"pricerange", "cheap"}};
  const EntityRow pricey_chinese{{"name", "hk fusion"}, {"food", "chinese"}, {"pricerange", "expensive"}};
  const EntityRow north_hotel{{"name", "acorn"}, {"area", "north"}, {"stars", "4"}};
  const EntityRow south_hotel{{"name", "bridge"}, {"area", "south"}, {"stars", "4"}};

  Goal rest;
  rest["restaurant"].inform = {{"food", "chinese"}, {"pricerange", "cheap"}};
  rest["restaurant"].request = {"phone"};
  Goal hotel;
  hotel["hotel"].inform = {{"area", "north"}};
  Goal both = rest;
  both["hotel"].inform = {{"area", "north"}};
  both["hotel"].request = {"postcode"};
  Goal request_only;
  request_only["restaurant"].request = {"address"};

  struct Case {
    Goal goal;
    DialogueOutcome outcome;
    bool inform, success;
  };
  using O = OfferedEntity;
  const std::vector<Case> cases{
      {rest, {{O{"restaurant", cheap_chinese}}, {"phone"}}, true, true},
      {rest, {{O{"restaurant", cheap_chinese}}, {}}, true, false},
      {rest, {{O{"restaurant", pricey_chinese}}, {"phone"}}, false, false},
      {rest, {{}, {"phone"}}, false, false},
      {rest, {{O{"restaurant", pricey_chinese}, O{"restaurant", cheap_chinese}}, {"phone", "name"}}, true, true},
      {rest, {{O{"hotel", cheap_chinese}}, {"phone"}}, false, false},  // right row, wrong domain
      {hotel, {{O{"hotel", north_hotel}}, {}}, true, true},
      {hotel, {{O{"hotel", south_hotel}}, {}}, false, false},
      {hotel, {{O{"hotel", south_hotel}, O{"hotel", north_hotel}}, {"phone"}}, true, true},
      {hotel, {{}, {}}, false, false},
      {both, {{O{"restaurant", cheap_chinese}, O{"hotel", north_hotel}}, {"phone", "postcode"}}, true, true},
      {both, {{O{"restaurant", cheap_chinese}, O{"hotel", north_hotel}}, {"phone"}}, true, false},
      {both, {{O{"restaurant", cheap_chinese}}, {"phone", "postcode"}}, false, false},
      {both, {{O{"hotel", north_hotel}}, {"phone", "postcode"}}, false, false},
      {both, {{O{"restaurant", cheap_chinese}, O{"hotel", south_hotel}}, {"phone", "postcode"}}, false, false},
      {request_only, {{}, {"address"}}, true, true},
      {request_only, {{}, {}}, true, false},
      {request_only, {{O{"restaurant", pricey_chinese}}, {"address", "phone"}}, true, true},
      {Goal{}, {{}, {}}, true, true},
      {rest, {{O{"restaurant", {{"food", "chinese"}}}}, {"phone"}}, false, false},  // row lacks pricerange
  };
  REQUIRE(cases.size() == 20);
  std::vector<DialogueOutcome> outcomes;
  std::vector<Goal> goals;
  double informed = 0, succeeded = 0;
  for (const Case& c : cases) {
    outcomes.push_back(c.outcome);
    goals.push_back(c.goal);
    informed += c.inform;
    succeeded += c.success;
    const InformSuccess one = inform_success({c.outcome}, {c.goal});
    CHECK(one.inform == (c.inform ? 100.0 : 0.0));
    CHECK(one.success == (c.success ? 100.0 : 0.0));
  }
  const InformSuccess all = inform_success(outcomes, goals);
  CHECK(informed == 11);
  CHECK(succeeded == 8);
  CHECK(all.inform == doctest::Approx(55.0));
  CHECK(all.success == doctest::Approx(40.0));
  CHECK(inform_success({}, {}).inform == 100.0);
  CHECK_THROWS_AS(inform_success({DialogueOutcome{}}, {}), PreconditionError);
}

TEST_CASE("metrics report JSON") {
  MetricsReport r;
  r.inform = 60;
  r.success = 40;
  r.bleu = 12.5;
  r.combined = combined(60, 40, 12.5);
  r.goal_score = goal_score(60, 40);
  r.jga = 0.25;
  r.dialogues = 10;
  r.turns = 40;
  r.meta["variant"] = "dl";
  r.meta["fraction"] = 0.1;
  r.meta["seed"] = 1;
  const Json j = Json::parse(r.to_json().dump());
  CHECK(validate_metrics_json(j) == "");
  CHECK(Json::parse(MetricsReport::from_json(j).to_json().dump()) == j);
  Json bad = j;
  bad["combined"] = 1.0;
  CHECK(validate_metrics_json(bad) != "");
  bad = j;
  bad["jga"] = 1.5;
  CHECK(validate_metrics_json(bad) != "");
  bad = j;
  bad.erase("bleu");
  CHECK(validate_metrics_json(bad) != "");
}

TEST_CASE("evaluate_model produces a valid, deterministic report") {
  const OntologySchema schema = OntologySchema::load(kFixtures + "/schema.json");
  const DialogueCorpus corpus = load_corpus(kFixtures + "/two_dialogues.jsonl", schema);
  const KnowledgeBase kb = KnowledgeBase::load(kFixtures + "/kb.json");
  std::vector<std::string> toks = nn::Vocab::reserved_tokens();
  for (const char* t : {"[restaurant]", "food", ":", "chinese", "[value_name]", "is", "good"}) toks.push_back(t);
  const nn::Vocab vocab(toks);
  nn::ModelConfig c;
  c.vocab_size = vocab.size();
  c.d_model = 16;
  c.n_heads = 2;
  c.d_ff = 32;
  c.enc_layers = 1;
  c.dec_layers = 1;
  c.init_seed = 3;
  const nn::Seq2SeqModel m(c);
  const Evaluation a = evaluate_model(m, vocab, corpus, kb, 20);
  const Evaluation b = evaluate_model(m, vocab, corpus, kb, 20);
  CHECK(a.report.to_json() == b.report.to_json());
  CHECK(a.report.dialogues == 2);
  CHECK(a.report.turns == corpus.total_turns());
  CHECK(a.predictions.size() == corpus.total_turns());
  OrderedJson j = a.report.to_json();
  j["meta"]["variant"] = "baseline";
  j["meta"]["fraction"] = 1.0;
  j["meta"]["seed"] = 0;
  CHECK(validate_metrics_json(Json::parse(j.dump())) == "");
  for (const auto& p : a.predictions) CHECK(p.db == query(kb, p.belief));
}

TEST_CASE("domain split has no leakage") {
  GeneratorConfig cfg = default_generator_config();
  cfg.num_dialogues = 120;
  const DialogueCorpus corpus = generate_synthetic(cfg, 6);
  for (const std::string holdout : {"attraction", "hotel", "restaurant"}) {
    const DomainSplit s = split_by_domain(corpus, holdout);
    CHECK(s.train_holdout_turns == 0);
    CHECK(s.train.dialogues.size() + s.holdout.dialogues.size() <= corpus.dialogues.size());
    CHECK_FALSE(s.holdout.dialogues.empty());
    for (const Dialogue& d : s.train.dialogues) {
      for (const auto& tag : d.domain_tags) CHECK(tag != holdout);
      for (const Turn& t : d.turns) CHECK(t.belief.entries.count(holdout) == 0);
    }
  }
  CHECK_THROWS_AS(split_by_domain(corpus, "police"), PreconditionError);
}
