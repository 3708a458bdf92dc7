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

#include <cstdlib>

#include "dualtod/augment.hpp"
#include "dualtod/error.hpp"

#ifndef DUALTOD_DATA_DIR
#define DUALTOD_DATA_DIR "data"
#endif

namespace dualtod {

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::kPara: return "para";
    case Strategy::kEda: return "eda";
    case Strategy::kSyn: return "syn";
  }
  return "para";
}

Strategy parse_strategy(const std::string& s) {
  if (s == "para") return Strategy::kPara;
  if (s == "eda") return Strategy::kEda;
  if (s == "syn") return Strategy::kSyn;
  throw ConfigError("unknown strategy '" + s + "' (want para|eda|syn)");
}

Thesaurus Thesaurus::from_json(const Json& j) {
  if (!j.is_object()) throw ParseError(0, "thesaurus must be an object");
  Thesaurus t;
  for (const auto& [key, alts] : j.items()) {
    Tokens k = split_ws(key);
    if (k.empty()) continue;
    if (!alts.is_array())
      throw ParseError(0, "thesaurus entry '" + key + "' must be an array");
    std::vector<Tokens> out;
    for (const auto& a : alts) {
      Tokens alt = split_ws(a.get<std::string>());
      if (!alt.empty() && alt != k) out.push_back(std::move(alt));
    }
    if (out.empty()) continue;
    t.max_key_len_ = std::max(t.max_key_len_, k.size());
    t.entries_[std::move(k)] = std::move(out);
  }
  return t;
}

Thesaurus Thesaurus::load(const std::filesystem::path& path) {
  return from_json(read_json_file(path));
}

std::vector<std::pair<std::size_t, const std::vector<Tokens>*>>
Thesaurus::matches_at(const Tokens& tokens, std::size_t pos) const {
  std::vector<std::pair<std::size_t, const std::vector<Tokens>*>> out;
  for (std::size_t len = 1; len <= max_key_len_ && pos + len <= tokens.size();
       ++len) {
    Tokens key(tokens.begin() + static_cast<std::ptrdiff_t>(pos),
               tokens.begin() + static_cast<std::ptrdiff_t>(pos + len));
    auto it = entries_.find(key);
    if (it != entries_.end()) out.emplace_back(len, &it->second);
  }
  return out;
}

FluencyTable FluencyTable::from_json(const Json& j) {
  FluencyTable f;
  f.default_logp_ = j.value("default", f.default_logp_);
  if (auto b = j.find("bigrams"); b != j.end()) {
    for (const auto& [key, lp] : b->items()) {
      Tokens pair = split_ws(key);
      if (pair.size() != 2)
        throw ParseError(0, "fluency bigram '" + key + "' needs two tokens");
      f.bigrams_[{pair[0], pair[1]}] = lp.get<double>();
    }
  }
  if (auto b = j.find("backoff"); b != j.end()) {
    for (const auto& [prev, lp] : b->items()) f.backoff_[prev] = lp.get<double>();
  }
  return f;
}

FluencyTable FluencyTable::load(const std::filesystem::path& path) {
  return from_json(read_json_file(path));
}

double FluencyTable::logp(const std::string& prev,
                          const std::string& next) const {
  auto it = bigrams_.find({prev, next});
  if (it != bigrams_.end()) return it->second;
  auto b = backoff_.find(prev);
  return b != backoff_.end() ? b->second : default_logp_;
}

AugmentResources AugmentResources::load(const std::filesystem::path& dir) {
  AugmentResources res;
  res.thesaurus = Thesaurus::load(dir / "thesaurus.json");
  if (std::filesystem::exists(dir / "fluency.json"))
    res.fluency = FluencyTable::load(dir / "fluency.json");
  return res;
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("DUALTOD_DATA"); env && *env) return env;
  return DUALTOD_DATA_DIR;
}

}  // namespace dualtod
