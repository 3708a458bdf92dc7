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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dualtod/augment.hpp"
#include "dualtod/dualdata.hpp"
#include "dualtod/io.hpp"
#include "dualtod/neural/batch.hpp"
#include "dualtod/neural/model.hpp"
#include "dualtod/neural/vocab.hpp"

namespace dualtod::train {

struct LossWeights {
  double fwd = 1.0;
  double b2c = 1.0;
  double r2c = 1.0;

  double of(Direction d) const;
  friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

// Rewrites per turn as a function of the training fraction: the first entry
// whose max_fraction is >= the fraction applies.
struct MSchedule {
  struct Entry {
    double max_fraction;
    std::size_t m;
  };
  std::vector<Entry> entries{{0.05, 2}, {0.2, 1}, {1.0, 0}};

  std::size_t m_for(double fraction) const;
};

struct TrainConfig {
  double learning_rate = 8e-4;
  double warmup_ratio = 0.2;
  std::size_t epochs = 10;
  std::size_t batch_size = 8;   // samples per step; each sample yields up to 3 pairs
  std::size_t max_steps = 0;    // 0: no cap beyond epochs
  MSchedule m_schedule;
  std::optional<std::size_t> m_override;
  Strategy augment_strategy = Strategy::kPara;
  LossWeights loss_weights;
  std::uint64_t seed = 0;
  bool enable_para = true;
  bool enable_du_dl = true;
  bool enable_ru_dl = true;

  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double weight_decay = 0.01;
  double grad_clip = 1.0;  // global L2 norm; 0 disables
  std::size_t log_every = 1;

  nn::ModelConfig model;  // vocab_size is filled from the vocabulary

  // Weights after the ablation flags are applied.
  LossWeights effective_weights() const;
  // Rewrites per turn at this training fraction (0 when enable_para is off).
  std::size_t m_at(double fraction) const;

  OrderedJson to_json() const;
  static TrainConfig from_json(const Json& j);
  void validate() const;  // throws ConfigError
};

// Linear warmup from 0 over ceil(warmup_ratio * total) steps, then linear
// decay to 0 at `total`.
double lr_at(std::size_t step, std::size_t total_steps, double warmup_ratio,
             double base_lr);

// w_fwd * nll(fwd) + w_b2c * nll(b2c) + w_r2c * nll(r2c); zero-weight terms
// are not evaluated.
double dual_loss(const nn::Seq2SeqModel& model, const nn::Batch& fwd,
                 const nn::Batch& b2c, const nn::Batch& r2c,
                 const LossWeights& weights);

// Unfused form of the summed dual objective: each direction's average
// token NLL computed independently by stepwise decoding, then summed.
double reference_dual_objective(const nn::Seq2SeqModel& model,
                                const nn::Vocab& vocab,
                                const std::vector<TrainingPair>& fwd,
                                const std::vector<TrainingPair>& b2c,
                                const std::vector<TrainingPair>& r2c);

// One (dialogue, t, j) sample: its pairs by direction.
struct Sample {
  const TrainingPair* pair[3] = {nullptr, nullptr, nullptr};
};
std::vector<Sample> group_samples(const std::vector<TrainingPair>& pairs);

struct StepRecord {
  std::size_t step = 0;  // 1-based
  std::size_t epoch = 0;
  double loss = 0.0;
  double loss_fwd = 0.0;
  double loss_b2c = 0.0;
  double loss_r2c = 0.0;
  double lr = 0.0;
  double token_accuracy = 0.0;
  double grad_norm = 0.0;
  double elapsed_s = 0.0;
};

struct TrainLog {
  std::vector<StepRecord> steps;
  std::vector<OrderedJson> epoch_snapshots;
  std::size_t total_steps = 0;
  double wall_clock_s = 0.0;

  // Loss traces only, without timings; equal across identical runs.
  OrderedJson losses_json() const;
  OrderedJson to_json() const;
};

struct TrainHooks {
  // Called after every epoch; a non-null result is stored in the log.
  std::function<OrderedJson(std::size_t epoch, const nn::Seq2SeqModel&)> on_epoch;
  // Receives the last parameters that produced a finite loss before a
  // NumericError aborts training.
  std::function<void(const nn::Seq2SeqModel&)> on_abort;
  // Early exit check after each step (e.g. overfit target reached).
  std::function<bool(const StepRecord&)> stop;
};

// Joint AdamW optimization of the summed loss, one step per batch of
// samples with every enabled direction present. Deterministic for a fixed
// cfg.seed.
TrainLog train(nn::Seq2SeqModel& model, const nn::Vocab& vocab,
               const std::vector<TrainingPair>& pairs, const TrainConfig& cfg,
               const TrainHooks& hooks = {});

}  // namespace dualtod::train
