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

#include "dualtod/eval/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <tuple>

#include "dualtod/error.hpp"

namespace dualtod::eval {

double jga(const std::vector<BeliefState>& predicted,
           const std::vector<BeliefState>& gold) {
  if (predicted.size() != gold.size())
    throw PreconditionError("jga: prediction and gold lengths differ");
  if (gold.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < gold.size(); ++i)
    if (predicted[i] == gold[i]) ++hit;
  return static_cast<double>(hit) / static_cast<double>(gold.size());
}

namespace {

Tokens fold(const Tokens& t) {
  Tokens out = t;
  for (auto& w : out)
    for (auto& ch : w) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

std::map<Tokens, std::size_t> ngrams(const Tokens& t, std::size_t n) {
  std::map<Tokens, std::size_t> out;
  if (t.size() < n) return out;
  for (std::size_t i = 0; i + n <= t.size(); ++i)
    ++out[Tokens(t.begin() + static_cast<std::ptrdiff_t>(i),
                 t.begin() + static_cast<std::ptrdiff_t>(i + n))];
  return out;
}

}  // namespace

double bleu(const std::vector<Tokens>& hypotheses,
            const std::vector<Tokens>& references) {
  if (hypotheses.size() != references.size())
    throw PreconditionError("bleu: hypothesis and reference counts differ");
  if (hypotheses.empty()) throw PreconditionError("bleu: empty corpus");
  std::size_t match[4] = {0, 0, 0, 0};
  std::size_t total[4] = {0, 0, 0, 0};
  std::size_t hyp_len = 0, ref_len = 0;
  for (std::size_t s = 0; s < hypotheses.size(); ++s) {
    const Tokens h = fold(hypotheses[s]);
    const Tokens r = fold(references[s]);
    hyp_len += h.size();
    ref_len += r.size();
    for (std::size_t n = 1; n <= 4; ++n) {
      const auto hc = ngrams(h, n);
      const auto rc = ngrams(r, n);
      for (const auto& [g, c] : hc) {
        auto it = rc.find(g);
        match[n - 1] += std::min(c, it == rc.end() ? std::size_t{0} : it->second);
        total[n - 1] += c;
      }
    }
  }
  // Orders with no hypothesis n-grams at all (every hypothesis shorter than
  // n) are left out of the geometric mean.
  double log_sum = 0.0;
  int orders = 0;
  for (int n = 0; n < 4; ++n) {
    if (total[n] == 0) continue;
    if (match[n] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(match[n]) / static_cast<double>(total[n]));
    ++orders;
  }
  if (orders == 0) return 0.0;
  double bp = 1.0;
  if (hyp_len < ref_len)
    bp = std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
  return 100.0 * bp * std::exp(log_sum / orders);
}

InformSuccess inform_success(const std::vector<DialogueOutcome>& outcomes,
                             const std::vector<Goal>& goals) {
  if (outcomes.size() != goals.size())
    throw PreconditionError("inform_success: outcomes and goals are not aligned");
  InformSuccess r{100.0, 100.0};
  if (goals.empty()) return r;
  std::size_t informed = 0, succeeded = 0;
  for (std::size_t d = 0; d < goals.size(); ++d) {
    bool inform_ok = true;
    bool request_ok = true;
    for (const auto& [domain, dg] : goals[d]) {
      if (!dg.inform.empty()) {
        bool found = false;
        for (const auto& offer : outcomes[d].offered) {
          if (offer.domain != domain) continue;
          bool all = true;
          for (const auto& [slot, value] : dg.inform) {
            auto it = offer.row.find(slot);
            if (it == offer.row.end() || it->second != value) {
              all = false;
              break;
            }
          }
          if (all) {
            found = true;
            break;
          }
        }
        inform_ok = inform_ok && found;
      }
      for (const auto& slot : dg.request)
        if (!outcomes[d].provided_slots.count(slot)) request_ok = false;
    }
    if (inform_ok) ++informed;
    if (inform_ok && request_ok) ++succeeded;
  }
  const double n = static_cast<double>(goals.size());
  r.inform = 100.0 * static_cast<double>(informed) / n;
  r.success = 100.0 * static_cast<double>(succeeded) / n;
  return r;
}

double combined(double inform, double success, double bleu) {
  return (inform + success) * 0.5 + bleu;
}

double goal_score(double inform, double success) { return (inform + success) * 0.5; }

OrderedJson MetricsReport::to_json() const {
  OrderedJson j;
  j["inform"] = inform;
  j["success"] = success;
  j["bleu"] = bleu;
  j["combined"] = combined;
  j["jga"] = jga;
  j["goal_score"] = goal_score;
  j["counts"] = {{"dialogues", dialogues}, {"turns", turns}};
  j["meta"] = meta;
  return j;
}

MetricsReport MetricsReport::from_json(const Json& j) {
  const std::string problem = validate_metrics_json(j);
  if (!problem.empty()) throw ParseError(0, "metrics report: " + problem);
  MetricsReport r;
  r.inform = j.at("inform").get<double>();
  r.success = j.at("success").get<double>();
  r.bleu = j.at("bleu").get<double>();
  r.combined = j.at("combined").get<double>();
  r.jga = j.at("jga").get<double>();
  r.goal_score = j.at("goal_score").get<double>();
  r.dialogues = j.at("counts").at("dialogues").get<std::size_t>();
  r.turns = j.at("counts").at("turns").get<std::size_t>();
  r.meta = OrderedJson::parse(j.at("meta").dump());
  return r;
}

std::string validate_metrics_json(const Json& j) {
  if (!j.is_object()) return "not an object";
  auto number_in = [&](const char* key, double lo, double hi) -> std::string {
    if (!j.contains(key) || !j.at(key).is_number()) return std::string("missing number ") + key;
    const double v = j.at(key).get<double>();
    if (!(v >= lo && v <= hi)) return std::string(key) + " out of range";
    return "";
  };
  for (auto [key, lo, hi] : {std::tuple{"inform", 0.0, 100.0},
                             std::tuple{"success", 0.0, 100.0},
                             std::tuple{"bleu", 0.0, 100.0},
                             std::tuple{"combined", 0.0, 200.0},
                             std::tuple{"jga", 0.0, 1.0},
                             std::tuple{"goal_score", 0.0, 100.0}}) {
    std::string p = number_in(key, lo, hi);
    if (!p.empty()) return p;
  }
  const double i = j.at("inform").get<double>(), s = j.at("success").get<double>();
  if (std::abs(j.at("combined").get<double>() - combined(i, s, j.at("bleu").get<double>())) > 1e-9)
    return "combined does not equal (inform + success) * 0.5 + bleu";
  if (std::abs(j.at("goal_score").get<double>() - goal_score(i, s)) > 1e-9)
    return "goal_score does not equal (inform + success) * 0.5";
  if (!j.contains("counts") || !j.at("counts").is_object()) return "missing counts";
  for (const char* key : {"dialogues", "turns"})
    if (!j.at("counts").contains(key) || !j.at("counts").at(key).is_number_unsigned())
      return std::string("missing counts.") + key;
  if (!j.contains("meta") || !j.at("meta").is_object()) return "missing meta";
  for (const char* key : {"variant", "fraction", "seed"})
    if (!j.at("meta").contains(key)) return std::string("missing meta.") + key;
  return "";
}

}  // namespace dualtod::eval
