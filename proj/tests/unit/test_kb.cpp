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

#include "doctest.h"
#include "dualtod/error.hpp"
#include "dualtod/generator.hpp"
#include "dualtod/kb.hpp"
#include "dualtod/rng.hpp"

using namespace dualtod;

namespace {

KnowledgeBase fixture_kb() { return KnowledgeBase::load(std::string(DUALTOD_FIXTURE_DIR) + "/kb.json"); }

// Reference query: scan all domains, pick the last constrained one.
DBResult naive_query(const KnowledgeBase& kb, const BeliefState& b) {
  DBResult r;
  std::string domain;
  for (const auto& [d, slots] : b.entries)
    if (!slots.empty()) domain = d;
  if (domain.empty()) return r;
  r.domain = domain;
  std::vector<EntityRow> hits;
  for (const auto& row : kb.rows(domain)) {
    std::size_t agree = 0;
    for (const auto& [s, v] : b.entries.at(domain))
      if (row.count(s) && row.at(s) == v) ++agree;
    if (agree == b.entries.at(domain).size()) hits.push_back(row);
  }
  r.match_count = hits.size();
  if (!hits.empty()) r.selected = hits.front();
  r.bucket = hits.size() >= 3 ? DbBucket::kThreePlus
                              : std::array{DbBucket::kZero, DbBucket::kOne, DbBucket::kTwo}[hits.size()];
  return r;
}

}  // namespace

TEST_CASE("bucket tokens") {
  CHECK(bucket_for_count(0) == DbBucket::kZero);
  CHECK(bucket_for_count(2) == DbBucket::kTwo);
  CHECK(bucket_for_count(3) == DbBucket::kThreePlus);
  CHECK(bucket_for_count(1000) == DbBucket::kThreePlus);
  for (DbBucket b : {DbBucket::kNone, DbBucket::kZero, DbBucket::kOne, DbBucket::kTwo, DbBucket::kThreePlus})
    CHECK(parse_bucket_token(bucket_token(b)) == b);
  CHECK_FALSE(parse_bucket_token("[db_4]").has_value());
  CHECK(encode_db(DBResult{}) == Tokens{"<db>", "[db_none]"});
}

TEST_CASE("query on the fixture KB") {
  const KnowledgeBase kb = fixture_kb();

  BeliefState b;
  b.set("restaurant", "food", "north indian");
  b.set("restaurant", "area", "centre");
  DBResult r = query(kb, b);
  CHECK(r.domain == "restaurant");
  CHECK(r.match_count == 0);
  CHECK_FALSE(r.selected.has_value());
  CHECK(r.bucket == DbBucket::kZero);

  b.set("restaurant", "food", "chinese");
  r = query(kb, b);
  CHECK(r.match_count == 3);
  CHECK(r.bucket == DbBucket::kThreePlus);
  REQUIRE(r.selected.has_value());
  CHECK(r.selected->at("name") == "charlie chan");

  CHECK(query(kb, BeliefState{}) == DBResult{});
}

TEST_CASE("active domain is the last constrained one") {
  const KnowledgeBase kb = fixture_kb();
  BeliefState b;
  b.set("hotel", "area", "north");
  b.set("restaurant", "area", "north");
  DBResult r = query(kb, b);
  CHECK(r.domain == "restaurant");
  CHECK(r.match_count == 1);
  CHECK(r.selected->at("name") == "royal spice");
  b.set("taxi", "leaveat", "13:00");  // no table for this domain
  r = query(kb, b);
  CHECK(r.domain == "taxi");
  CHECK(r.bucket == DbBucket::kZero);
}

TEST_CASE("query agrees with a reference scan on random beliefs") {
  const GeneratorConfig cfg = default_generator_config();
  const KnowledgeBase kb = build_kb(cfg);
  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    BeliefState b;
    for (const auto& [domain, spec] : cfg.domains) {
      if (!rng.bernoulli(0.5)) continue;
      for (const auto& [slot, s] : spec.informable)
        if (rng.bernoulli(0.4)) b.set(domain, slot, rng.pick(s.values));
    }
    const DBResult got = query(kb, b);
    CHECK(got == naive_query(kb, b));
    CHECK(got == query(kb, b));
    CHECK(got.selected.has_value() == (got.match_count > 0));
  }
}

TEST_CASE("KB JSON round trip keeps row order") {
  const KnowledgeBase kb = fixture_kb();
  const KnowledgeBase back = KnowledgeBase::from_json(Json::parse(kb.to_json().dump()));
  CHECK(back.tables() == kb.tables());
  CHECK(back.rows("restaurant").front().at("name") == "charlie chan");
  CHECK(back.rows("police").empty());
}

TEST_CASE("generated KB is a function of the config") {
  GeneratorConfig cfg = default_generator_config();
  CHECK(build_kb(cfg).tables() == build_kb(cfg).tables());
  for (const auto& [domain, spec] : cfg.domains) CHECK(build_kb(cfg).rows(domain).size() == spec.kb_rows);
}
