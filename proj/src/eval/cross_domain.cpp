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

#include "dualtod/eval/cross_domain.hpp"

#include <chrono>

#include "dualtod/error.hpp"
#include "dualtod/parallel.hpp"
#include "dualtod/train/study.hpp"
#include "dualtod/train/variants.hpp"

namespace dualtod::eval {
namespace {

bool touches(const Dialogue& d, const std::string& domain) {
  if (d.domain_tags.count(domain)) return true;
  for (const Turn& t : d.turns)
    if (t.belief.entries.count(domain)) return true;
  return false;
}

}  // namespace

DomainSplit split_by_domain(const DialogueCorpus& corpus, const std::string& holdout) {
  DomainSplit s;
  s.train.schema = corpus.schema;
  s.holdout.schema = corpus.schema;
  for (const Dialogue& d : corpus.dialogues) {
    if (touches(d, holdout))
      s.holdout.dialogues.push_back(d);
    else
      s.train.dialogues.push_back(d);
  }
  if (s.holdout.dialogues.empty())
    throw PreconditionError("holdout domain '" + holdout + "' does not occur in the corpus");
  if (s.train.dialogues.empty())
    throw PreconditionError("holdout domain '" + holdout +
                            "' covers the whole corpus; nothing left to train on");
  for (const Dialogue& d : s.train.dialogues)
    for (const Turn& t : d.turns)
      if (d.domain_tags.count(holdout) || t.belief.entries.count(holdout))
        ++s.train_holdout_turns;
  return s;
}

OrderedJson CrossDomainConfig::to_json() const {
  OrderedJson j;
  j["holdout"] = holdout;
  j["ms"] = ms;
  j["seed"] = seed;
  j["max_train_dialogues"] = max_train_dialogues;
  j["max_eval_dialogues"] = max_eval_dialogues;
  j["threads"] = threads;
  j["train"] = train.to_json();
  return j;
}

CrossDomainConfig CrossDomainConfig::from_json(const Json& j) {
  CrossDomainConfig c;
  if (!j.is_object()) throw ConfigError("cross-domain config must be a JSON object");
  try {
    c.holdout = j.value("holdout", c.holdout);
    if (j.contains("ms")) c.ms = j.at("ms").get<std::vector<std::size_t>>();
    c.seed = j.value("seed", c.seed);
    c.max_train_dialogues = j.value("max_train_dialogues", c.max_train_dialogues);
    c.max_eval_dialogues = j.value("max_eval_dialogues", c.max_eval_dialogues);
    c.threads = j.value("threads", c.threads);
    if (j.contains("train")) c.train = train::TrainConfig::from_json(j.at("train"));
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("cross-domain config: ") + e.what());
  }
  return c;
}

OrderedJson cross_domain_eval(const DialogueCorpus& corpus, const KnowledgeBase& kb,
                              const CrossDomainConfig& cfg,
                              const AugmentResources& res) {
  if (cfg.ms.empty()) throw ConfigError("cross-domain run needs at least one m");
  const auto start = std::chrono::steady_clock::now();
  DomainSplit split = split_by_domain(corpus, cfg.holdout);
  if (split.train_holdout_turns != 0)
    throw PreconditionError("training split leaks holdout-domain turns");
  if (cfg.max_train_dialogues > 0 && split.train.dialogues.size() > cfg.max_train_dialogues)
    split.train.dialogues.resize(cfg.max_train_dialogues);
  if (cfg.max_eval_dialogues > 0 && split.holdout.dialogues.size() > cfg.max_eval_dialogues)
    split.holdout.dialogues.resize(cfg.max_eval_dialogues);

  std::vector<train::CellResult> rows(cfg.ms.size());
  parallel_for(cfg.ms.size(), worker_threads(cfg.threads), [&](std::size_t i) {
    train::TrainConfig tc = train::apply_variant(cfg.train, "mdtod");
    tc.m_override = cfg.ms[i];
    rows[i] = train::run_cell(split.train, split.holdout, kb, tc, cfg.ms[i], cfg.seed, res);
    rows[i].variant = "mdtod";
    rows[i].fraction = 1.0;
    rows[i].metrics.meta = {{"variant", "mdtod"},
                            {"fraction", 1.0},
                            {"seed", cfg.seed},
                            {"holdout", cfg.holdout},
                            {"m", cfg.ms[i]}};
  });

  std::size_t train_turns = 0;
  for (const auto& d : split.train.dialogues) train_turns += d.turns.size();

  OrderedJson report;
  report["holdout"] = cfg.holdout;
  report["train_dialogues"] = split.train.dialogues.size();
  report["eval_dialogues"] = split.holdout.dialogues.size();
  report["audit"] = {{"train_turns", train_turns},
                     {"train_holdout_turns", split.train_holdout_turns},
                     {"zero_leakage", split.train_holdout_turns == 0}};
  OrderedJson arr = OrderedJson::array();
  for (const auto& r : rows)
    arr.push_back({{"m", r.m},
                   {"goal_score", r.metrics.goal_score},
                   {"bleu", r.metrics.bleu},
                   {"inform", r.metrics.inform},
                   {"success", r.metrics.success},
                   {"jga", r.metrics.jga},
                   {"pairs", r.pairs},
                   {"steps", r.steps},
                   {"wall_clock_s", r.wall_clock_s}});
  report["rows"] = std::move(arr);
  report["config"] = cfg.to_json();
  report["wall_clock_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::string validate_cross_domain_report(const Json& r) {
  if (!r.is_object()) return "report is not an object";
  for (const char* key : {"holdout", "train_dialogues", "eval_dialogues", "audit", "rows"})
    if (!r.contains(key)) return std::string("missing ") + key;
  if (!r.at("audit").contains("train_holdout_turns")) return "audit missing train_holdout_turns";
  if (!r.at("rows").is_array() || r.at("rows").empty()) return "rows must be a non-empty array";
  for (const auto& row : r.at("rows")) {
    for (const char* key : {"m", "goal_score", "bleu"})
      if (!row.contains(key) || !row.at(key).is_number()) return std::string("row missing ") + key;
    const double g = row.at("goal_score").get<double>(), b = row.at("bleu").get<double>();
    if (g < 0.0 || g > 100.0 || b < 0.0 || b > 100.0) return "row value out of range";
  }
  return "";
}

}  // namespace dualtod::eval
