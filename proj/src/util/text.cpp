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

#include "dualtod/text.hpp"

#include <algorithm>
#include <cctype>

namespace dualtod {
namespace {

bool is_detachable(char c) {
  switch (c) {
    case ',': case '.': case '?': case '!': case ';': case ':':
    case '(': case ')': case '"':
      return true;
    default:
      return false;
  }
}

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }

// Splits one whitespace-free chunk into tokens.
void split_chunk(const std::string& chunk, Tokens& out) {
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  const std::size_t n = chunk.size();
  for (std::size_t i = 0; i < n; ++i) {
    char c = chunk[i];
    if ((c == '[' || c == '<') && cur.empty()) {
      char close = c == '[' ? ']' : '>';
      std::size_t end = chunk.find(close, i + 1);
      if (end != std::string::npos && end > i + 1) {
        flush();
        out.push_back(chunk.substr(i, end - i + 1));
        i = end;
        continue;
      }
    }
    if (is_detachable(c)) {
      bool numeric_infix = (c == '.' || c == ':' || c == ',') && i > 0 &&
                           i + 1 < n && is_digit(chunk[i - 1]) &&
                           is_digit(chunk[i + 1]);
      if (!numeric_infix) {
        flush();
        out.emplace_back(1, c);
        continue;
      }
    }
    if (c == '\'' && !cur.empty()) {
      // "don't" -> "do n't"; "that's" -> "that 's"
      if (cur.back() == 'n' && i + 1 < n && chunk[i + 1] == 't' &&
          (i + 2 == n || !std::isalpha(static_cast<unsigned char>(chunk[i + 2])))) {
        cur.pop_back();
        flush();
        out.emplace_back("n't");
        ++i;
        continue;
      }
      flush();
    }
    cur.push_back(c);
  }
  flush();
}

}  // namespace

Tokens tokenize(std::string_view text) {
  std::string lowered(text);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  Tokens out;
  for (const auto& chunk : split_ws(lowered)) split_chunk(chunk, out);
  return out;
}

Tokens split_ws(std::string_view text) {
  Tokens out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i])))
      ++i;
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])))
      ++i;
    if (i > start) out.emplace_back(text.substr(start, i - start));
  }
  return out;
}

std::string join(const Tokens& tokens, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.append(sep);
    out.append(tokens[i]);
  }
  return out;
}

std::vector<std::size_t> find_spans(const Tokens& haystack,
                                    const Tokens& needle) {
  std::vector<std::size_t> starts;
  if (needle.empty() || needle.size() > haystack.size()) return starts;
  for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    if (std::equal(needle.begin(), needle.end(), haystack.begin() + i))
      starts.push_back(i);
  }
  return starts;
}

bool contains_span(const Tokens& haystack, const Tokens& needle) {
  if (needle.empty()) return true;
  return std::search(haystack.begin(), haystack.end(), needle.begin(),
                     needle.end()) != haystack.end();
}

bool is_placeholder(std::string_view token) {
  return token.size() > 8 && token.substr(0, 7) == "[value_" &&
         token.back() == ']';
}

std::string_view placeholder_slot(std::string_view token) {
  if (!is_placeholder(token)) return {};
  return token.substr(7, token.size() - 8);
}

std::string make_placeholder(std::string_view slot) {
  std::string out = "[value_";
  out.append(slot);
  out.push_back(']');
  return out;
}

}  // namespace dualtod
