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
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dualtod/belief.hpp"
#include "dualtod/io.hpp"
#include "dualtod/text.hpp"

namespace dualtod {

using EntityRow = std::map<std::string, std::string>;

enum class DbBucket { kNone, kZero, kOne, kTwo, kThreePlus };

std::string bucket_token(DbBucket bucket);  // "[db_0]" etc.
DbBucket bucket_for_count(std::size_t match_count);
std::optional<DbBucket> parse_bucket_token(const std::string& token);

struct DBResult {
  std::optional<std::string> domain;
  std::size_t match_count = 0;
  std::optional<EntityRow> selected;
  DbBucket bucket = DbBucket::kNone;

  friend bool operator==(const DBResult&, const DBResult&) = default;
};

class KnowledgeBase {
 public:
  KnowledgeBase() = default;
  explicit KnowledgeBase(std::map<std::string, std::vector<EntityRow>> tables)
      : tables_(std::move(tables)) {}

  // `{domain: [{attribute: value}]}`; file row order is the stable order.
  static KnowledgeBase from_json(const Json& j);
  static KnowledgeBase load(const std::filesystem::path& path);
  OrderedJson to_json() const;

  const std::vector<EntityRow>& rows(const std::string& domain) const;
  const std::map<std::string, std::vector<EntityRow>>& tables() const {
    return tables_;
  }
  bool has_domain(const std::string& domain) const {
    return tables_.count(domain) != 0;
  }

 private:
  std::map<std::string, std::vector<EntityRow>> tables_;
};

// S_t = [B_t; D_t]
struct DialogueState {
  BeliefState belief;
  DBResult db;
};

// Active domain: the last domain of the belief, in canonical order, that has
// at least one constraint. Rows match when every constrained slot equals the
// row attribute exactly.
DBResult query(const KnowledgeBase& kb, const BeliefState& belief);

// `<db> [<bucket>]`
Tokens encode_db(const DBResult& result);

inline constexpr const char* kDbMarker = "<db>";

}  // namespace dualtod
