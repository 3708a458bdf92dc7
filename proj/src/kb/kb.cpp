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

#include "dualtod/kb.hpp"

#include "dualtod/error.hpp"

namespace dualtod {

std::string bucket_token(DbBucket bucket) {
  switch (bucket) {
    case DbBucket::kNone: return "[db_none]";
    case DbBucket::kZero: return "[db_0]";
    case DbBucket::kOne: return "[db_1]";
    case DbBucket::kTwo: return "[db_2]";
    case DbBucket::kThreePlus: return "[db_3plus]";
  }
  return "[db_none]";
}

DbBucket bucket_for_count(std::size_t match_count) {
  switch (match_count) {
    case 0: return DbBucket::kZero;
    case 1: return DbBucket::kOne;
    case 2: return DbBucket::kTwo;
    default: return DbBucket::kThreePlus;
  }
}

std::optional<DbBucket> parse_bucket_token(const std::string& token) {
  for (DbBucket b : {DbBucket::kNone, DbBucket::kZero, DbBucket::kOne,
                     DbBucket::kTwo, DbBucket::kThreePlus}) {
    if (bucket_token(b) == token) return b;
  }
  return std::nullopt;
}

KnowledgeBase KnowledgeBase::from_json(const Json& j) {
  if (!j.is_object()) throw ParseError(0, "KB JSON must be an object");
  std::map<std::string, std::vector<EntityRow>> tables;
  for (const auto& [domain, rows] : j.items()) {
    if (!rows.is_array())
      throw ParseError(0, "KB table '" + domain + "' must be an array");
    auto& table = tables[domain];
    for (const auto& row : rows) {
      if (!row.is_object())
        throw ParseError(0, "KB row in '" + domain + "' must be an object");
      EntityRow entity;
      for (const auto& [attr, value] : row.items()) {
        if (!value.is_string())
          throw ParseError(0, "KB attribute '" + attr + "' must be a string");
        entity[attr] = value.get<std::string>();
      }
      table.push_back(std::move(entity));
    }
  }
  return KnowledgeBase(std::move(tables));
}

KnowledgeBase KnowledgeBase::load(const std::filesystem::path& path) {
  return from_json(read_json_file(path));
}

OrderedJson KnowledgeBase::to_json() const {
  OrderedJson out = OrderedJson::object();
  for (const auto& [domain, rows] : tables_) {
    OrderedJson arr = OrderedJson::array();
    for (const auto& row : rows) {
      OrderedJson r = OrderedJson::object();
      for (const auto& [k, v] : row) r[k] = v;
      arr.push_back(std::move(r));
    }
    out[domain] = std::move(arr);
  }
  return out;
}

const std::vector<EntityRow>& KnowledgeBase::rows(
    const std::string& domain) const {
  static const std::vector<EntityRow> kEmpty;
  auto it = tables_.find(domain);
  return it == tables_.end() ? kEmpty : it->second;
}

DBResult query(const KnowledgeBase& kb, const BeliefState& belief) {
  DBResult result;
  const SlotValues* constraints = nullptr;
  for (const auto& [domain, slots] : belief.entries) {
    if (!slots.empty()) {
      result.domain = domain;
      constraints = &slots;
    }
  }
  if (!result.domain) return result;

  for (const auto& row : kb.rows(*result.domain)) {
    bool ok = true;
    for (const auto& [slot, value] : *constraints) {
      auto it = row.find(slot);
      if (it == row.end() || it->second != value) {
        ok = false;
        break;
      }
    }
    if (ok) {
      if (result.match_count == 0) result.selected = row;
      ++result.match_count;
    }
  }
  result.bucket = bucket_for_count(result.match_count);
  return result;
}

Tokens encode_db(const DBResult& result) {
  return {kDbMarker, bucket_token(result.bucket)};
}

}  // namespace dualtod
