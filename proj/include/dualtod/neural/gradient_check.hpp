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
#include <string>

#include "dualtod/neural/batch.hpp"
#include "dualtod/neural/model.hpp"

namespace dualtod::nn {

struct GradCheckOptions {
  // 0 checks every coordinate; otherwise a seeded sample of this many
  // coordinates, spread over all parameter blocks.
  std::size_t max_coords = 0;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_block;
  std::size_t worst_index = 0;
  std::size_t coords_checked = 0;
};

// Central differences of nll against grads(). Relative error per coordinate:
// |a - n| / (|a| + |n| + epsilon). Throws PreconditionError unless
// epsilon > 0.
GradCheckResult gradient_check(const Seq2SeqModel& model, const Batch& batch,
                               double epsilon,
                               const GradCheckOptions& opts = {});

}  // namespace dualtod::nn
