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
#include <cstring>

#include "doctest.h"
#include "dualtod/error.hpp"
#include "dualtod/generator.hpp"
#include "dualtod/train/train.hpp"
#include "dualtod/train/variants.hpp"

using namespace dualtod;
using namespace dualtod::nn;
namespace tr = dualtod::train;

namespace {

struct Fixture {
  std::vector<TrainingPair> pairs;
  Vocab vocab;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    GeneratorConfig cfg = default_generator_config();
    cfg.num_dialogues = 4;
    const DialogueCorpus corpus = generate_synthetic(cfg, 13);
    const AugmentResources res = AugmentResources::load(default_data_dir());
    Fixture out;
    out.pairs = build_training_set(corpus, build_kb(cfg), 0, Strategy::kPara, 0, res).pairs;
    out.vocab = Vocab::build(out.pairs);
    return out;
  }();
  return f;
}

ModelConfig tiny_model(std::size_t vocab) {
  ModelConfig c;
  c.vocab_size = vocab;
  c.d_model = 16;
  c.n_heads = 2;
  c.d_ff = 32;
  c.enc_layers = 1;
  c.dec_layers = 1;
  c.max_positions = 512;
  c.init_seed = 4;
  return c;
}

std::vector<TrainingPair> of_direction(const std::vector<TrainingPair>& pairs, Direction d, std::size_t n) {
  std::vector<TrainingPair> out;
  for (const auto& p : pairs)
    if (p.direction == d && out.size() < n) out.push_back(p);
  return out;
}

tr::TrainConfig quick_config() {
  tr::TrainConfig c;
  c.epochs = 2;
  c.batch_size = 4;
  c.max_steps = 6;
  c.learning_rate = 3e-3;
  c.seed = 21;
  return c;
}

}  // namespace

TEST_CASE("learning-rate schedule") {
  CHECK(tr::lr_at(60, 100, 0.2, 8e-4) == doctest::Approx(4e-4).epsilon(1e-15));
  CHECK(tr::lr_at(0, 100, 0.2, 8e-4) == 0.0);
  CHECK(tr::lr_at(10, 100, 0.2, 8e-4) == doctest::Approx(4e-4).epsilon(1e-15));
  CHECK(tr::lr_at(20, 100, 0.2, 8e-4) == doctest::Approx(8e-4).epsilon(1e-15));
  CHECK(tr::lr_at(100, 100, 0.2, 8e-4) == 0.0);
  CHECK(tr::lr_at(5, 10, 0.0, 1.0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(tr::lr_at(101, 100, 0.2, 8e-4), PreconditionError);
}

TEST_CASE("m schedule and effective weights") {
  tr::TrainConfig c;
  CHECK(c.m_at(0.01) == 2);
  CHECK(c.m_at(0.05) == 2);
  CHECK(c.m_at(0.1) == 1);
  CHECK(c.m_at(0.2) == 1);
  CHECK(c.m_at(0.5) == 0);
  c.m_override = 3;
  CHECK(c.m_at(0.5) == 3);
  c.enable_para = false;
  CHECK(c.m_at(0.01) == 0);
  c.enable_du_dl = false;
  CHECK(c.effective_weights() == tr::LossWeights{1.0, 0.0, 1.0});
}

TEST_CASE("variants") {
  const tr::TrainConfig base;
  const auto base_v = tr::apply_variant(base, "baseline");
  CHECK_FALSE(base_v.enable_para);
  CHECK(base_v.effective_weights() == tr::LossWeights{1.0, 0.0, 0.0});
  const auto dl = tr::apply_variant(base, "dl");
  CHECK_FALSE(dl.enable_para);
  CHECK(dl.effective_weights() == tr::LossWeights{1.0, 1.0, 1.0});
  const auto md = tr::apply_variant(base, "mdtod");
  CHECK(md.enable_para);
  CHECK(md.effective_weights() == tr::LossWeights{1.0, 1.0, 1.0});
  CHECK(tr::apply_variant(base, "wo-du").effective_weights() == tr::LossWeights{1.0, 0.0, 1.0});
  CHECK(tr::apply_variant(base, "wo-ru").effective_weights() == tr::LossWeights{1.0, 1.0, 0.0});
  CHECK(tr::apply_variant(base, "wo-para").to_json() == dl.to_json());
  CHECK(tr::apply_variant(base, "wo-both").to_json() == base_v.to_json());
  CHECK_THROWS_AS(tr::apply_variant(base, "nope"), ConfigError);
  CHECK(tr::variant_names().size() == 7);
}

TEST_CASE("config JSON round trip and validation") {
  tr::TrainConfig c = quick_config();
  c.m_override = 2;
  c.loss_weights = {1.0, 0.5, 0.25};
  const tr::TrainConfig back = tr::TrainConfig::from_json(Json::parse(c.to_json().dump()));
  CHECK(back.to_json() == c.to_json());
  Json bad = Json::parse(c.to_json().dump());
  bad["learning_rate"] = -1.0;
  CHECK_THROWS_AS(tr::TrainConfig::from_json(bad), ConfigError);
  bad = Json::parse(c.to_json().dump());
  bad["batch_size"] = 0;
  CHECK_THROWS_AS(tr::TrainConfig::from_json(bad), ConfigError);
}

TEST_CASE("dual loss equals the unfused reference objective") {
  const Fixture& f = fixture();
  const Seq2SeqModel m(tiny_model(f.vocab.size()));
  const auto fwd = of_direction(f.pairs, Direction::kFwd, 5);
  const auto b2c = of_direction(f.pairs, Direction::kB2C, 5);
  const auto r2c = of_direction(f.pairs, Direction::kR2C, 5);
  const Batch bf = make_batch(fwd, f.vocab), bb = make_batch(b2c, f.vocab), br = make_batch(r2c, f.vocab);

  const double fused = tr::dual_loss(m, bf, bb, br, {1.0, 1.0, 1.0});
  const double ref = tr::reference_dual_objective(m, f.vocab, fwd, b2c, r2c);
  CHECK(std::abs(fused - ref) < 1e-12);
  CHECK(tr::dual_loss(m, bf, bb, br, {1.0, 0.0, 0.0}) == nll(m, bf));
  CHECK(tr::dual_loss(m, bf, bb, br, {0.0, 2.0, 0.0}) == 2.0 * nll(m, bb));
}

TEST_CASE("samples group the three directions of each (dialogue, t, j)") {
  const Fixture& f = fixture();
  const auto samples = tr::group_samples(f.pairs);
  CHECK(samples.size() * 3 == f.pairs.size());
  for (const auto& s : samples) {
    REQUIRE(s.pair[0] != nullptr);
    for (int d = 0; d < 3; ++d) {
      REQUIRE(s.pair[d] != nullptr);
      CHECK(s.pair[d]->direction == kAllDirections[d]);
      CHECK(s.pair[d]->dialogue_id == s.pair[0]->dialogue_id);
      CHECK(s.pair[d]->t == s.pair[0]->t);
      CHECK(s.pair[d]->j == s.pair[0]->j);
    }
  }
}

TEST_CASE("zero epochs leave the parameters untouched") {
  const Fixture& f = fixture();
  Seq2SeqModel m(tiny_model(f.vocab.size()));
  const std::vector<double> before(m.params().begin(), m.params().end());
  tr::TrainConfig c = quick_config();
  c.epochs = 0;
  const tr::TrainLog log = tr::train(m, f.vocab, f.pairs, c);
  CHECK(log.steps.empty());
  CHECK(std::memcmp(before.data(), m.params().data(), before.size() * sizeof(double)) == 0);
}

TEST_CASE("training is deterministic and lowers the loss") {
  const Fixture& f = fixture();
  tr::TrainConfig c = quick_config();
  Seq2SeqModel a(tiny_model(f.vocab.size())), b(tiny_model(f.vocab.size()));
  const tr::TrainLog la = tr::train(a, f.vocab, f.pairs, c);
  const tr::TrainLog lb = tr::train(b, f.vocab, f.pairs, c);
  CHECK(la.losses_json() == lb.losses_json());
  CHECK(std::memcmp(a.params().data(), b.params().data(), a.num_params() * sizeof(double)) == 0);
  CHECK(la.steps.size() == 6);
  CHECK(la.steps.front().lr == 0.0);
  for (const auto& s : la.steps) CHECK(s.loss == doctest::Approx(s.loss_fwd + s.loss_b2c + s.loss_r2c));

  c.seed = 22;
  Seq2SeqModel d(tiny_model(f.vocab.size()));
  tr::train(d, f.vocab, f.pairs, c);
  CHECK(std::memcmp(a.params().data(), d.params().data(), a.num_params() * sizeof(double)) != 0);

  // Longer run on the same data must reduce the training loss.
  tr::TrainConfig longer = quick_config();
  longer.epochs = 10;
  longer.max_steps = 40;
  Seq2SeqModel e(tiny_model(f.vocab.size()));
  const Batch all = make_batch(of_direction(f.pairs, Direction::kFwd, 100), f.vocab);
  const double before = nll(e, all);
  tr::train(e, f.vocab, f.pairs, longer);
  CHECK(nll(e, all) < before);
}

TEST_CASE("the baseline variant never touches reverse-task losses") {
  const Fixture& f = fixture();
  Seq2SeqModel m(tiny_model(f.vocab.size()));
  const tr::TrainLog log = tr::train(m, f.vocab, f.pairs, tr::apply_variant(quick_config(), "baseline"));
  for (const auto& s : log.steps) {
    CHECK(s.loss_b2c == 0.0);
    CHECK(s.loss_r2c == 0.0);
    CHECK(s.loss == s.loss_fwd);
  }
}

TEST_CASE("step records carry the pre-clip gradient norm") {
  const Fixture& f = fixture();
  tr::TrainConfig c = quick_config();
  c.max_steps = 1;
  c.warmup_ratio = 0.0;
  Seq2SeqModel m(tiny_model(f.vocab.size()));
  const tr::TrainLog log = tr::train(m, f.vocab, f.pairs, c);
  REQUIRE(log.steps.size() == 1);
  CHECK(log.steps[0].grad_norm > 0.0);
}

TEST_CASE("non-finite loss aborts with the pre-update model") {
  const Fixture& f = fixture();
  Seq2SeqModel m(tiny_model(f.vocab.size()));
  m.params()[m.block("out.b").offset] = std::numeric_limits<double>::infinity();
  bool aborted = false;
  tr::TrainHooks hooks;
  hooks.on_abort = [&](const Seq2SeqModel& at) {
    aborted = true;
    CHECK(std::isinf(at.params()[at.block("out.b").offset]));
  };
  CHECK_THROWS_AS(tr::train(m, f.vocab, f.pairs, quick_config(), hooks), NumericError);
  CHECK(aborted);
}

TEST_CASE("all-zero weights give zero loss") {
  const Fixture& f = fixture();
  const Seq2SeqModel m(tiny_model(f.vocab.size()));
  const Batch b = make_batch(of_direction(f.pairs, Direction::kFwd, 2), f.vocab);
  CHECK(tr::dual_loss(m, b, b, b, {0.0, 0.0, 0.0}) == 0.0);
}
