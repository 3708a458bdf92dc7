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
#include <string>
#include <string_view>
#include <vector>

namespace dualtod {

using Tokens = std::vector<std::string>;

// Lowercases, detaches punctuation and clitics ("that's" -> "that 's"), then
// splits on whitespace. Bracketed markers such as `[value_food]` or `<eos>`
// and clock times such as `13:30` survive as single tokens.
Tokens tokenize(std::string_view text);

// Plain whitespace split without normalization.
Tokens split_ws(std::string_view text);

std::string join(const Tokens& tokens, std::string_view sep = " ");

// Start offsets of every occurrence of `needle` in `haystack`.
std::vector<std::size_t> find_spans(const Tokens& haystack,
                                    const Tokens& needle);

bool contains_span(const Tokens& haystack, const Tokens& needle);

bool is_placeholder(std::string_view token);

// `[value_food]` -> `food`; empty view when not a placeholder.
std::string_view placeholder_slot(std::string_view token);

std::string make_placeholder(std::string_view slot);

}  // namespace dualtod
