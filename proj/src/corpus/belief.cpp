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

#include "dualtod/belief.hpp"

namespace dualtod {
namespace {

bool is_domain_token(const std::string& tok) {
  if (tok.size() < 3 || tok.front() != '[' || tok.back() != ']') return false;
  if (tok == kNoneToken || is_placeholder(tok)) return false;
  if (tok.rfind("[db_", 0) == 0) return false;
  for (std::size_t i = 1; i + 1 < tok.size(); ++i) {
    char c = tok[i];
    if (!((c >= 'a' && c <= 'z') || c == '_' || (c >= '0' && c <= '9')))
      return false;
  }
  return true;
}

bool is_marker(const std::string& tok) {
  return tok.size() >= 3 && tok.front() == '<' && tok.back() == '>';
}

}  // namespace

void BeliefState::set(const std::string& domain, const std::string& slot,
                      const std::string& value) {
  if (domain.empty() || slot.empty() || value.empty()) return;
  entries[domain][slot] = value;
}

const std::string* BeliefState::get(const std::string& domain,
                                    const std::string& slot) const {
  auto d = entries.find(domain);
  if (d == entries.end()) return nullptr;
  auto s = d->second.find(slot);
  return s == d->second.end() ? nullptr : &s->second;
}

std::size_t BeliefState::slot_count() const {
  std::size_t n = 0;
  for (const auto& [_, slots] : entries) n += slots.size();
  return n;
}

std::vector<std::string> BeliefState::values() const {
  std::vector<std::string> out;
  for (const auto& [_, slots] : entries)
    for (const auto& [__, value] : slots) out.push_back(value);
  return out;
}

Tokens serialize_belief(const BeliefState& belief) {
  if (belief.empty()) return {kNoneToken};
  Tokens out;
  for (const auto& [domain, slots] : belief.entries) {
    out.push_back("[" + domain + "]");
    bool first = true;
    for (const auto& [slot, value] : slots) {
      if (!first) out.emplace_back(",");
      first = false;
      out.push_back(slot);
      out.emplace_back(":");
      for (auto& v : split_ws(value)) out.push_back(std::move(v));
    }
  }
  return out;
}

BeliefState parse_belief(const Tokens& tokens) {
  BeliefState out;
  std::string domain;
  // Fragment currently being read: slot tokens before ':' and value tokens
  // after it.
  Tokens slot_part, value_part;
  bool seen_colon = false;
  bool broken = false;

  auto commit = [&] {
    if (!domain.empty() && !broken && seen_colon && slot_part.size() == 1 &&
        !value_part.empty()) {
      out.set(domain, slot_part.front(), join(value_part));
    }
    slot_part.clear();
    value_part.clear();
    seen_colon = false;
    broken = false;
  };

  for (const auto& tok : tokens) {
    if (is_domain_token(tok)) {
      commit();
      domain = tok.substr(1, tok.size() - 2);
      continue;
    }
    if (tok == kNoneToken || is_marker(tok)) {
      commit();
      domain.clear();
      continue;
    }
    if (tok == ",") {
      commit();
      continue;
    }
    if (tok == ":") {
      if (seen_colon) broken = true;
      seen_colon = true;
      continue;
    }
    (seen_colon ? value_part : slot_part).push_back(tok);
  }
  commit();
  return out;
}

}  // namespace dualtod
