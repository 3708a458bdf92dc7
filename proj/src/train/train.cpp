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

#include "dualtod/train/train.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <tuple>

#include "dualtod/error.hpp"
#include "dualtod/neural/decode.hpp"
#include "dualtod/rng.hpp"
#include "dualtod/simd/kernels.hpp"

namespace dualtod::train {

double LossWeights::of(Direction d) const {
  switch (d) {
    case Direction::kFwd: return fwd;
    case Direction::kB2C: return b2c;
    case Direction::kR2C: return r2c;
  }
  return 0.0;
}

std::size_t MSchedule::m_for(double fraction) const {
  for (const Entry& e : entries)
    if (fraction <= e.max_fraction + 1e-12) return e.m;
  return entries.empty() ? 0 : entries.back().m;
}

LossWeights TrainConfig::effective_weights() const {
  LossWeights w = loss_weights;
  if (!enable_du_dl) w.b2c = 0.0;
  if (!enable_ru_dl) w.r2c = 0.0;
  return w;
}

std::size_t TrainConfig::m_at(double fraction) const {
  if (!enable_para) return 0;
  return m_override ? *m_override : m_schedule.m_for(fraction);
}

OrderedJson TrainConfig::to_json() const {
  OrderedJson sched = OrderedJson::array();
  for (const auto& e : m_schedule.entries)
    sched.push_back({{"max_fraction", e.max_fraction}, {"m", e.m}});
  OrderedJson j;
  j["learning_rate"] = learning_rate;
  j["warmup_ratio"] = warmup_ratio;
  j["epochs"] = epochs;
  j["batch_size"] = batch_size;
  j["max_steps"] = max_steps;
  j["m_schedule"] = std::move(sched);
  j["m_override"] = m_override ? OrderedJson(*m_override) : OrderedJson(nullptr);
  j["augment_strategy"] = to_string(augment_strategy);
  j["loss_weights"] = {{"fwd", loss_weights.fwd},
                       {"b2c", loss_weights.b2c},
                       {"r2c", loss_weights.r2c}};
  j["seed"] = seed;
  j["enable_para"] = enable_para;
  j["enable_du_dl"] = enable_du_dl;
  j["enable_ru_dl"] = enable_ru_dl;
  j["beta1"] = beta1;
  j["beta2"] = beta2;
  j["adam_eps"] = adam_eps;
  j["weight_decay"] = weight_decay;
  j["grad_clip"] = grad_clip;
  j["log_every"] = log_every;
  j["model"] = model.to_json();
  return j;
}

TrainConfig TrainConfig::from_json(const Json& j) {
  TrainConfig c;
  if (!j.is_object()) throw ConfigError("train config must be a JSON object");
  try {
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.warmup_ratio = j.value("warmup_ratio", c.warmup_ratio);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.max_steps = j.value("max_steps", c.max_steps);
    if (j.contains("m_schedule")) {
      c.m_schedule.entries.clear();
      for (const auto& e : j.at("m_schedule"))
        c.m_schedule.entries.push_back(
            {e.at("max_fraction").get<double>(), e.at("m").get<std::size_t>()});
    }
    if (j.contains("m_override") && !j.at("m_override").is_null())
      c.m_override = j.at("m_override").get<std::size_t>();
    if (j.contains("augment_strategy"))
      c.augment_strategy = parse_strategy(j.at("augment_strategy").get<std::string>());
    if (j.contains("loss_weights")) {
      const auto& w = j.at("loss_weights");
      c.loss_weights.fwd = w.value("fwd", 1.0);
      c.loss_weights.b2c = w.value("b2c", 1.0);
      c.loss_weights.r2c = w.value("r2c", 1.0);
    }
    c.seed = j.value("seed", c.seed);
    c.enable_para = j.value("enable_para", c.enable_para);
    c.enable_du_dl = j.value("enable_du_dl", c.enable_du_dl);
    c.enable_ru_dl = j.value("enable_ru_dl", c.enable_ru_dl);
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    c.adam_eps = j.value("adam_eps", c.adam_eps);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.grad_clip = j.value("grad_clip", c.grad_clip);
    c.log_every = j.value("log_every", c.log_every);
    if (j.contains("model")) c.model = nn::ModelConfig::from_json(j.at("model"));
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(warmup_ratio >= 0.0 && warmup_ratio < 1.0))
    throw ConfigError("warmup_ratio must be in [0, 1)");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (loss_weights.fwd < 0.0 || loss_weights.b2c < 0.0 || loss_weights.r2c < 0.0)
    throw ConfigError("loss weights must be >= 0");
  if (grad_clip < 0.0) throw ConfigError("grad_clip must be >= 0");
  if (log_every == 0) throw ConfigError("log_every must be >= 1");
}

double lr_at(std::size_t step, std::size_t total_steps, double warmup_ratio,
             double base_lr) {
  if (step > total_steps) throw PreconditionError("step beyond total_steps");
  const auto warmup = static_cast<std::size_t>(
      std::ceil(warmup_ratio * static_cast<double>(total_steps) - 1e-9));
  if (step < warmup)
    return base_lr * static_cast<double>(step) / static_cast<double>(warmup);
  if (total_steps == warmup) return base_lr;
  return base_lr * static_cast<double>(total_steps - step) /
         static_cast<double>(total_steps - warmup);
}

double dual_loss(const nn::Seq2SeqModel& model, const nn::Batch& fwd,
                 const nn::Batch& b2c, const nn::Batch& r2c,
                 const LossWeights& w) {
  double total = 0.0;
  if (w.fwd != 0.0) total += w.fwd * nn::nll(model, fwd);
  if (w.b2c != 0.0) total += w.b2c * nn::nll(model, b2c);
  if (w.r2c != 0.0) total += w.r2c * nn::nll(model, r2c);
  return total;
}

double reference_dual_objective(const nn::Seq2SeqModel& model,
                                const nn::Vocab& vocab,
                                const std::vector<TrainingPair>& fwd,
                                const std::vector<TrainingPair>& b2c,
                                const std::vector<TrainingPair>& r2c) {
  auto term = [&](const std::vector<TrainingPair>& pairs) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& p : pairs) {
      const auto src = vocab.encode(p.input);
      const auto tgt = vocab.encode(p.target);
      sum -= nn::score_sequence(model, src, tgt);
      count += tgt.size();
    }
    return count == 0 ? 0.0 : sum / static_cast<double>(count);
  };
  return term(fwd) + term(b2c) + term(r2c);
}

std::vector<Sample> group_samples(const std::vector<TrainingPair>& pairs) {
  std::vector<Sample> samples;
  std::map<std::tuple<std::string, std::size_t, std::size_t>, std::size_t> index;
  for (const auto& p : pairs) {
    auto key = std::make_tuple(p.dialogue_id, p.t, p.j);
    auto [it, fresh] = index.emplace(key, samples.size());
    if (fresh) samples.emplace_back();
    samples[it->second].pair[static_cast<int>(p.direction)] = &p;
  }
  return samples;
}

OrderedJson TrainLog::losses_json() const {
  OrderedJson arr = OrderedJson::array();
  for (const auto& s : steps)
    arr.push_back({{"step", s.step},
                   {"loss", s.loss},
                   {"fwd", s.loss_fwd},
                   {"b2c", s.loss_b2c},
                   {"r2c", s.loss_r2c},
                   {"lr", s.lr}});
  return arr;
}

OrderedJson TrainLog::to_json() const {
  OrderedJson arr = OrderedJson::array();
  for (const auto& s : steps)
    arr.push_back({{"step", s.step},
                   {"epoch", s.epoch},
                   {"loss", s.loss},
                   {"fwd", s.loss_fwd},
                   {"b2c", s.loss_b2c},
                   {"r2c", s.loss_r2c},
                   {"lr", s.lr},
                   {"token_accuracy", s.token_accuracy},
                   {"grad_norm", s.grad_norm},
                   {"elapsed_s", s.elapsed_s}});
  OrderedJson j;
  j["total_steps"] = total_steps;
  j["wall_clock_s"] = wall_clock_s;
  j["steps"] = std::move(arr);
  j["epochs"] = epoch_snapshots;
  return j;
}

TrainLog train(nn::Seq2SeqModel& model, const nn::Vocab& vocab,
               const std::vector<TrainingPair>& pairs, const TrainConfig& cfg,
               const TrainHooks& hooks) {
  cfg.validate();
  if (pairs.empty()) throw PreconditionError("training set is empty");
  if (model.config().vocab_size != vocab.size())
    throw PreconditionError("model vocabulary size does not match the vocab");
  const auto start = std::chrono::steady_clock::now();
  const LossWeights w = cfg.effective_weights();
  const std::vector<Sample> samples = group_samples(pairs);

  const std::size_t per_epoch = (samples.size() + cfg.batch_size - 1) / cfg.batch_size;
  std::size_t total = per_epoch * cfg.epochs;
  if (cfg.max_steps > 0) total = std::min(total, cfg.max_steps);

  TrainLog log;
  log.total_steps = total;
  const std::size_t n = model.num_params();
  std::vector<double> grad(n), m1(n, 0.0), m2(n, 0.0);
  const auto& K = simd::kernels();
  auto params = model.params();

  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs && step < total; ++epoch) {
    std::vector<std::size_t> order(samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(mix_seed(cfg.seed, epoch));
    rng.shuffle(order);

    for (std::size_t b = 0; b < per_epoch && step < total; ++b) {
      std::fill(grad.begin(), grad.end(), 0.0);
      StepRecord rec;
      rec.step = step + 1;
      rec.epoch = epoch;
      nn::SequenceStats all;
      const std::size_t lo = b * cfg.batch_size;
      const std::size_t hi = std::min(lo + cfg.batch_size, samples.size());
      for (Direction d : kAllDirections) {
        const double wd = w.of(d);
        if (wd == 0.0) continue;
        std::vector<const TrainingPair*> chosen;
        for (std::size_t i = lo; i < hi; ++i)
          if (auto* p = samples[order[i]].pair[static_cast<int>(d)]) chosen.push_back(p);
        if (chosen.empty()) continue;
        const nn::Batch batch = nn::make_batch(chosen, vocab);
        const nn::SequenceStats s = nn::accumulate_grads(model, batch, wd, grad);
        const double l = s.tokens ? s.nll_sum / static_cast<double>(s.tokens) : 0.0;
        if (d == Direction::kFwd) rec.loss_fwd = l;
        if (d == Direction::kB2C) rec.loss_b2c = l;
        if (d == Direction::kR2C) rec.loss_r2c = l;
        rec.loss += wd * l;
        all += s;
      }
      rec.token_accuracy =
          all.tokens ? static_cast<double>(all.correct) / static_cast<double>(all.tokens) : 0.0;

      try {
        if (!std::isfinite(rec.loss))
          throw NumericError("non-finite loss at step " + std::to_string(rec.step));
        nn::check_finite(model, grad, "gradient");
      } catch (const NumericError&) {
        if (hooks.on_abort) hooks.on_abort(model);
        throw;
      }

      double sq = 0.0;
      for (double g : grad) sq += g * g;
      rec.grad_norm = std::sqrt(sq);
      if (cfg.grad_clip > 0.0 && rec.grad_norm > cfg.grad_clip) {
        const double scale = cfg.grad_clip / rec.grad_norm;
        for (double& g : grad) g *= scale;
      }

      rec.lr = lr_at(step, total, cfg.warmup_ratio, cfg.learning_rate);
      const double t = static_cast<double>(step + 1);
      simd::AdamWStep as{rec.lr, cfg.beta1, cfg.beta2, cfg.adam_eps, 0.0,
                         1.0 - std::pow(cfg.beta1, t), 1.0 - std::pow(cfg.beta2, t)};
      for (const nn::ParamBlock& blk : model.blocks()) {
        as.weight_decay = blk.decay ? cfg.weight_decay : 0.0;
        K.adamw(blk.size(), params.data() + blk.offset, grad.data() + blk.offset,
                m1.data() + blk.offset, m2.data() + blk.offset, as);
      }
      ++step;
      rec.elapsed_s = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start).count();
      if (rec.step % cfg.log_every == 0 || step == total) log.steps.push_back(rec);
      if (hooks.stop && hooks.stop(rec)) {
        if (log.steps.empty() || log.steps.back().step != rec.step)
          log.steps.push_back(rec);
        total = step;
        log.total_steps = step;
        break;
      }
    }
    if (hooks.on_epoch) {
      OrderedJson snap = hooks.on_epoch(epoch, model);
      if (!snap.is_null()) log.epoch_snapshots.push_back(std::move(snap));
    }
  }
  log.wall_clock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return log;
}

}  // namespace dualtod::train
