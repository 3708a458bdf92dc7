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

#include <map>
#include <string>
#include <vector>

#include "dualtod/text.hpp"

namespace dualtod {

using SlotValues = std::map<std::string, std::string>;

// domain -> slot -> value. std::map keeps domains and slots in the canonical
// alphabetical order, so iteration order is serialization order.
struct BeliefState {
  std::map<std::string, SlotValues> entries;

  bool empty() const { return entries.empty(); }
  // Empty values are ignored so no empty value or domain map can exist.
  void set(const std::string& domain, const std::string& slot,
           const std::string& value);
  const std::string* get(const std::string& domain,
                         const std::string& slot) const;
  std::size_t slot_count() const;
  // Every value string, in canonical order.
  std::vector<std::string> values() const;

  friend bool operator==(const BeliefState&, const BeliefState&) = default;
};

// `[<domain>] <slot> : <value> , ...` in canonical order; `[none]` if empty.
Tokens serialize_belief(const BeliefState& belief);

// Lenient inverse of serialize_belief. Fragments that do not parse are
// dropped; never throws.
BeliefState parse_belief(const Tokens& tokens);

inline constexpr const char* kNoneToken = "[none]";

}  // namespace dualtod
