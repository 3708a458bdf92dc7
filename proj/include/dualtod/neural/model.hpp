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
#include <string>
#include <vector>

#include "dualtod/io.hpp"
#include "dualtod/neural/batch.hpp"
#include "dualtod/neural/tensor.hpp"
#include "dualtod/neural/vocab.hpp"

namespace dualtod::nn {

struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t d_model = 64;
  std::size_t n_heads = 4;
  std::size_t d_ff = 128;
  std::size_t enc_layers = 2;
  std::size_t dec_layers = 2;
  std::size_t max_positions = 512;
  // Final LayerNorm on encoder and decoder outputs. Off only for the
  // embedding-to-logits sanity model.
  bool final_norm = true;
  // Zero output projection: uniform logits until the first update.
  bool zero_init_output = false;
  std::uint64_t init_seed = 0;

  OrderedJson to_json() const;
  static ModelConfig from_json(const Json& j);
  void validate() const;  // throws ConfigError

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct ParamBlock {
  std::string name;
  std::size_t offset = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  bool decay = false;  // weight decay applies (matrices, not norms/biases)

  std::size_t size() const { return rows * cols; }
};

struct SequenceStats {
  double nll_sum = 0.0;
  std::size_t tokens = 0;
  std::size_t correct = 0;  // teacher-forced argmax hits

  SequenceStats& operator+=(const SequenceStats& o) {
    nll_sum += o.nll_sum;
    tokens += o.tokens;
    correct += o.correct;
    return *this;
  }
};

// Pre-norm transformer encoder-decoder over one flat parameter store shared
// by every task direction. The decoder starts from <pad> and never needs
// padding inside a sequence, so sequences are processed one at a time.
class Seq2SeqModel {
 public:
  explicit Seq2SeqModel(const ModelConfig& cfg);

  const ModelConfig& config() const { return cfg_; }
  const std::vector<ParamBlock>& blocks() const { return blocks_; }
  const ParamBlock& block(const std::string& name) const;
  std::size_t num_params() const { return params_.size(); }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  // Teacher-forced -sum log p(tgt | src). When `grad` is non-null, adds
  // grad_scale * d(sum)/d(theta) into it.
  SequenceStats forward_backward(std::span<const TokenId> src,
                                 std::span<const TokenId> tgt, double* grad,
                                 double grad_scale) const;

  struct Encoded {
    Mat memory;
  };
  Encoded encode(std::span<const TokenId> src) const;

  // Log-probabilities of the token following `prefix` (which starts with the
  // <pad> start symbol).
  std::vector<double> next_log_probs(const Encoded& enc,
                                     std::span<const TokenId> prefix) const;

 private:
  void initialize();

  ModelConfig cfg_;
  std::vector<ParamBlock> blocks_;
  std::vector<double> params_;
  Mat positions_;
};

// Mean -log p over the non-pad target tokens of the batch (0 if none).
double nll(const Seq2SeqModel& model, const Batch& batch);
SequenceStats batch_stats(const Seq2SeqModel& model, const Batch& batch);

struct Gradients {
  std::vector<double> values;  // aligned with Seq2SeqModel::params()
  double loss = 0.0;
  SequenceStats stats;
};

// Exact gradients of nll(model, batch). Throws NumericError naming the
// parameter block when any entry is non-finite.
Gradients grads(const Seq2SeqModel& model, const Batch& batch);

// Adds scale * d nll(batch) / d theta into `out`; returns the batch stats.
SequenceStats accumulate_grads(const Seq2SeqModel& model, const Batch& batch,
                               double scale, std::vector<double>& out);

void check_finite(const Seq2SeqModel& model, std::span<const double> values,
                  const char* what);

}  // namespace dualtod::nn
