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

#include "dualtod/train/variants.hpp"

#include <algorithm>

#include "dualtod/error.hpp"

namespace dualtod::train {

const std::vector<std::string>& variant_names() {
  static const std::vector<std::string> names{"baseline", "dl",    "mdtod", "wo-para",
                                              "wo-du",    "wo-ru", "wo-both"};
  return names;
}

bool is_variant(const std::string& name) {
  const auto& n = variant_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

TrainConfig apply_variant(const TrainConfig& base, const std::string& name) {
  TrainConfig c = base;
  c.loss_weights = LossWeights{};
  auto set = [&](bool para, bool du, bool ru) {
    c.enable_para = para;
    c.enable_du_dl = du;
    c.enable_ru_dl = ru;
  };
  if (name == "baseline" || name == "wo-both") {
    set(false, false, false);
  } else if (name == "dl" || name == "wo-para") {
    set(false, true, true);
  } else if (name == "mdtod") {
    set(true, true, true);
  } else if (name == "wo-du") {
    set(true, false, true);
  } else if (name == "wo-ru") {
    set(true, true, false);
  } else {
    throw ConfigError("unknown variant '" + name + "'");
  }
  return c;
}

}  // namespace dualtod::train
