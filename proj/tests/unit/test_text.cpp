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

#include <algorithm>
#include "doctest.h"
#include "dualtod/rng.hpp"
#include "dualtod/text.hpp"

using namespace dualtod;

TEST_CASE("tokenize lowercases and detaches punctuation") {
  CHECK(tokenize("Hi, I am looking for a restaurant.") ==
        Tokens{"hi", ",", "i", "am", "looking", "for", "a", "restaurant", "."});
  CHECK(tokenize("that's too bad") == Tokens{"that", "'s", "too", "bad"});
  CHECK(tokenize("we don't") == Tokens{"we", "do", "n't"});
}

TEST_CASE("tokenize keeps markers, placeholders and clock times whole") {
  CHECK(tokenize("at 13:30 .") == Tokens{"at", "13:30", "."});
  CHECK(tokenize("serving [value_food] food <eos>") ==
        Tokens{"serving", "[value_food]", "food", "<eos>"});
  CHECK(tokenize("costs 3.50 pounds") == Tokens{"costs", "3.50", "pounds"});
}

TEST_CASE("span search") {
  const Tokens hay = split_ws("will hail hit los angeles this weekend ?");
  CHECK(contains_span(hay, {"los", "angeles"}));
  CHECK_FALSE(contains_span(hay, {"angeles", "los"}));
  CHECK(find_spans(split_ws("a b a b a"), {"a", "b"}) == std::vector<std::size_t>{0, 2});
  CHECK(contains_span(hay, {}));
}

TEST_CASE("placeholder grammar") {
  CHECK(is_placeholder("[value_food]"));
  CHECK_FALSE(is_placeholder("[value_]"));
  CHECK_FALSE(is_placeholder("[Value_food]"));
  CHECK_FALSE(is_placeholder("[restaurant]"));
  CHECK(placeholder_slot("[value_price_range]") == "price_range");
  CHECK(make_placeholder("food") == "[value_food]");
}

TEST_CASE("join and split are inverse on single-spaced text") {
  const std::string s = "a b [value_x] <eos>";
  CHECK(join(split_ws(s)) == s);
}

TEST_CASE("seed derivation is stable and order independent") {
  CHECK(derive_seed(7, "SNG0586", 2, 0) == derive_seed(7, "SNG0586", 2, 0));
  CHECK(derive_seed(7, "SNG0586", 2, 0) != derive_seed(7, "SNG0586", 2, 1));
  CHECK(derive_seed(7, "SNG0586", 2, 0) != derive_seed(8, "SNG0586", 2, 0));
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("rng helpers stay in range") {
  Rng r(3);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(r.below(7) < 7u);
  }
  std::vector<int> v{1, 2, 3, 4, 5, 6};
  r.shuffle(v);
  std::sort(v.begin(), v.end());
  CHECK(v == std::vector<int>{1, 2, 3, 4, 5, 6});
}
