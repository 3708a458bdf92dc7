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

#include <string>
#include <vector>

#include "dualtod/train/train.hpp"

namespace dualtod::train {

// baseline  forward task only
// dl        dual learning, no rewrites
// mdtod     dual learning with m rewrites per turn
// wo-para   mdtod without rewrites (same switches as dl)
// wo-du     mdtod without the state-to-utterance direction
// wo-ru     mdtod without the response-to-utterance direction
// wo-both   forward task only, no rewrites (same switches as baseline)
const std::vector<std::string>& variant_names();
bool is_variant(const std::string& name);

// Applies the variant's switches on top of `base`; other fields are kept.
// Throws ConfigError for an unknown name.
TrainConfig apply_variant(const TrainConfig& base, const std::string& name);

}  // namespace dualtod::train
