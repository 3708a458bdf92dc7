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

#include <filesystem>
#include <string>

#include "dualtod/io.hpp"
#include "dualtod/neural/model.hpp"
#include "dualtod/neural/vocab.hpp"

namespace dualtod::nn {

// Binary layout (little-endian):
//   "DTODCKP1" | u32 version | u64 manifest length | manifest JSON
//   | u64 parameter count | parameters as IEEE-754 doubles
// The manifest holds the model config, the block table (name, offset, shape),
// the vocabulary and free-form metadata.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  Seq2SeqModel model;
  Vocab vocab;
  OrderedJson meta;
};

std::string serialize_checkpoint(const Seq2SeqModel& model, const Vocab& vocab,
                                 const OrderedJson& meta = OrderedJson::object());
Checkpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path,
                     const Seq2SeqModel& model, const Vocab& vocab,
                     const OrderedJson& meta = OrderedJson::object());
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace dualtod::nn
