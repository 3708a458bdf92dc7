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

#include "dualtod/neural/gradient_check.hpp"

#include <algorithm>
#include <cmath>

#include "dualtod/error.hpp"
#include "dualtod/rng.hpp"

namespace dualtod::nn {

GradCheckResult gradient_check(const Seq2SeqModel& model, const Batch& batch,
                               double epsilon, const GradCheckOptions& opts) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw PreconditionError("gradient_check needs a positive finite epsilon");
  const Gradients g = grads(model, batch);
  Seq2SeqModel probe = model;
  auto theta = probe.params();

  std::vector<std::size_t> coords;
  const std::size_t n = theta.size();
  if (opts.max_coords == 0 || opts.max_coords >= n) {
    coords.resize(n);
    for (std::size_t i = 0; i < n; ++i) coords[i] = i;
  } else {
    // Every block gets a share so small blocks (norms, biases) are covered.
    Rng rng(opts.seed);
    const auto& blocks = model.blocks();
    const std::size_t per_block =
        std::max<std::size_t>(1, opts.max_coords / blocks.size());
    for (const ParamBlock& b : blocks) {
      for (std::size_t k = 0; k < std::min(per_block, b.size()); ++k)
        coords.push_back(b.offset + rng.below(b.size()));
    }
    std::sort(coords.begin(), coords.end());
    coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
  }

  GradCheckResult r;
  for (std::size_t i : coords) {
    const double saved = theta[i];
    theta[i] = saved + epsilon;
    const double up = nll(probe, batch);
    theta[i] = saved - epsilon;
    const double down = nll(probe, batch);
    theta[i] = saved;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double analytic = g.values[i];
    const double err = std::abs(analytic - numeric) /
                       (std::abs(analytic) + std::abs(numeric) + epsilon);
    ++r.coords_checked;
    if (r.coords_checked == 1 || err > r.max_rel_error) {
      r.max_rel_error = err;
      for (const ParamBlock& b : model.blocks()) {
        if (i >= b.offset && i < b.offset + b.size()) {
          r.worst_block = b.name;
          r.worst_index = i - b.offset;
        }
      }
    }
  }
  return r;
}

}  // namespace dualtod::nn
