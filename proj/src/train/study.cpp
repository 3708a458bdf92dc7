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

#include "dualtod/train/study.hpp"

#include <chrono>
#include <cmath>
#include <set>

#include "dualtod/dualdata.hpp"
#include "dualtod/error.hpp"
#include "dualtod/eval/evaluate.hpp"
#include "dualtod/parallel.hpp"
#include "dualtod/text.hpp"
#include "dualtod/train/variants.hpp"

namespace dualtod::train {

std::vector<std::string> ontology_tokens(const OntologySchema& schema) {
  std::set<std::string> seen;
  std::vector<std::string> out;
  auto add = [&](const std::string& t) {
    if (seen.insert(t).second) out.push_back(t);
  };
  for (const auto& [domain, ds] : schema.domains) {
    add("[" + domain + "]");
    for (const auto& s : ds.slots) {
      add(s);
      add(make_placeholder(s));
    }
    for (const auto& s : ds.requestables) add(make_placeholder(s));
  }
  return out;
}

OrderedJson CellResult::to_json() const {
  OrderedJson j;
  j["fraction"] = fraction;
  j["seed"] = seed;
  j["variant"] = variant;
  j["m"] = m;
  j["train_dialogues"] = train_dialogues;
  j["pairs"] = pairs;
  j["shortfall_turns"] = shortfall_turns;
  j["metrics"] = metrics.to_json();
  j["steps"] = steps;
  j["wall_clock_s"] = wall_clock_s;
  return j;
}

CellResult run_cell(const DialogueCorpus& train_corpus,
                    const DialogueCorpus& test_corpus, const KnowledgeBase& kb,
                    const TrainConfig& cfg, std::size_t m, std::uint64_t seed,
                    const AugmentResources& res) {
  const auto start = std::chrono::steady_clock::now();
  CellResult cell;
  cell.seed = seed;
  cell.m = m;
  cell.train_dialogues = train_corpus.dialogues.size();

  const TrainingSet ts =
      build_training_set(train_corpus, kb, m, cfg.augment_strategy, seed, res);
  cell.pairs = ts.pairs.size();
  cell.shortfall_turns = ts.shortfall_turns;
  const nn::Vocab vocab =
      nn::Vocab::build(ts.pairs, 1, ontology_tokens(train_corpus.schema));

  TrainConfig c = cfg;
  c.seed = seed;
  c.model.vocab_size = vocab.size();
  c.model.init_seed = seed;
  nn::Seq2SeqModel model(c.model);
  const TrainLog log = train(model, vocab, ts.pairs, c);
  cell.steps = log.total_steps;

  cell.metrics = eval::evaluate_model(model, vocab, test_corpus, kb).report;
  cell.wall_clock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return cell;
}

OrderedJson StudyConfig::to_json() const {
  OrderedJson j;
  j["fractions"] = fractions;
  j["seeds"] = seeds;
  j["variants"] = variants;
  j["test_fraction"] = test_fraction;
  j["split_seed"] = split_seed;
  j["max_test_dialogues"] = max_test_dialogues;
  j["threads"] = threads;
  j["train"] = train.to_json();
  return j;
}

StudyConfig StudyConfig::from_json(const Json& j) {
  StudyConfig c;
  if (!j.is_object()) throw ConfigError("study config must be a JSON object");
  try {
    if (j.contains("fractions")) c.fractions = j.at("fractions").get<std::vector<double>>();
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("variants"))
      c.variants = j.at("variants").get<std::vector<std::string>>();
    c.test_fraction = j.value("test_fraction", c.test_fraction);
    c.split_seed = j.value("split_seed", c.split_seed);
    c.max_test_dialogues = j.value("max_test_dialogues", c.max_test_dialogues);
    c.threads = j.value("threads", c.threads);
    if (j.contains("train")) c.train = TrainConfig::from_json(j.at("train"));
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("study config: ") + e.what());
  }
  c.validate();
  return c;
}

void StudyConfig::validate() const {
  if (fractions.empty()) throw ConfigError("study needs at least one fraction");
  for (double f : fractions)
    if (!(f > 0.0 && f <= 1.0)) throw ConfigError("fractions must lie in (0, 1]");
  if (seeds.empty()) throw ConfigError("study needs at least one seed");
  if (variants.empty()) throw ConfigError("study needs at least one variant");
  for (const auto& v : variants)
    if (!is_variant(v)) throw ConfigError("unknown variant '" + v + "'");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw ConfigError("test_fraction must lie in (0, 1)");
  train.validate();
}

Split split_corpus(const DialogueCorpus& corpus, double test_fraction,
                   std::uint64_t seed) {
  Split s;
  s.test = subsample(corpus, test_fraction, seed);
  std::set<std::string> held;
  for (const auto& d : s.test.dialogues) held.insert(d.dialogue_id);
  s.train.schema = corpus.schema;
  for (const auto& d : corpus.dialogues)
    if (!held.count(d.dialogue_id)) s.train.dialogues.push_back(d);
  return s;
}

namespace {

OrderedJson mean_std(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  const double sd =
      xs.size() > 1 ? std::sqrt(var / static_cast<double>(xs.size() - 1)) : 0.0;
  return {{"mean", mean}, {"std", sd}};
}

const char* kMetricKeys[] = {"inform", "success", "bleu", "combined", "jga", "goal_score"};

}  // namespace

OrderedJson run_low_resource_study(const DialogueCorpus& corpus,
                                   const KnowledgeBase& kb,
                                   const StudyConfig& cfg,
                                   const AugmentResources& res) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  Split split = split_corpus(corpus, cfg.test_fraction, cfg.split_seed);
  if (cfg.max_test_dialogues > 0 && split.test.dialogues.size() > cfg.max_test_dialogues)
    split.test.dialogues.resize(cfg.max_test_dialogues);
  if (split.train.dialogues.empty()) throw PreconditionError("study train pool is empty");

  struct Job {
    double fraction;
    std::uint64_t seed;
    std::string variant;
  };
  std::vector<Job> jobs;
  for (double f : cfg.fractions)
    for (std::uint64_t s : cfg.seeds)
      for (const auto& v : cfg.variants) jobs.push_back({f, s, v});

  std::vector<CellResult> cells(jobs.size());
  parallel_for(jobs.size(), worker_threads(cfg.threads), [&](std::size_t i) {
    const Job& job = jobs[i];
    const TrainConfig tc = apply_variant(cfg.train, job.variant);
    const DialogueCorpus sub = subsample(split.train, job.fraction, job.seed);
    CellResult cell =
        run_cell(sub, split.test, kb, tc, tc.m_at(job.fraction), job.seed, res);
    cell.fraction = job.fraction;
    cell.variant = job.variant;
    cell.metrics.meta = {{"variant", job.variant},
                         {"fraction", job.fraction},
                         {"seed", job.seed}};
    cells[i] = std::move(cell);
  });

  OrderedJson report;
  report["cells"] = OrderedJson::array();
  for (const auto& c : cells) report["cells"].push_back(c.to_json());

  OrderedJson summary = OrderedJson::array();
  for (double f : cfg.fractions) {
    double baseline_combined = std::nan("");
    for (const auto& v : cfg.variants) {
      OrderedJson row;
      row["fraction"] = f;
      row["variant"] = v;
      std::size_t n = 0;
      OrderedJson metrics;
      for (const char* key : kMetricKeys) {
        std::vector<double> xs;
        for (const auto& c : cells) {
          if (c.fraction != f || c.variant != v) continue;
          xs.push_back(c.metrics.to_json().at(key).get<double>());
        }
        n = xs.size();
        metrics[key] = mean_std(xs);
      }
      row["runs"] = n;
      row["metrics"] = metrics;
      const double comb = metrics["combined"]["mean"].get<double>();
      if (v == "baseline") baseline_combined = comb;
      if (!std::isnan(baseline_combined) && v != "baseline")
        row["combined_minus_baseline"] = comb - baseline_combined;
      summary.push_back(std::move(row));
    }
  }
  report["summary"] = std::move(summary);
  report["split"] = {{"test_dialogues", split.test.dialogues.size()},
                     {"pool_dialogues", split.train.dialogues.size()}};
  report["config"] = cfg.to_json();
  report["wall_clock_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::string validate_study_report(const Json& r) {
  if (!r.is_object()) return "report is not an object";
  if (!r.contains("cells") || !r.at("cells").is_array() || r.at("cells").empty())
    return "missing cells";
  for (const auto& c : r.at("cells")) {
    for (const char* key : {"fraction", "seed", "variant", "metrics", "steps", "wall_clock_s"})
      if (!c.contains(key)) return std::string("cell missing ") + key;
    if (!c.at("fraction").is_number() || !c.at("seed").is_number_unsigned() ||
        !c.at("variant").is_string() || !c.at("steps").is_number_unsigned() ||
        !c.at("wall_clock_s").is_number())
      return "cell field has the wrong type";
    const std::string p = eval::validate_metrics_json(c.at("metrics"));
    if (!p.empty()) return "cell metrics: " + p;
  }
  if (!r.contains("summary") || !r.at("summary").is_array()) return "missing summary";
  for (const auto& s : r.at("summary")) {
    if (!s.contains("metrics")) return "summary row missing metrics";
    for (const char* key : kMetricKeys) {
      if (!s.at("metrics").contains(key)) return std::string("summary missing ") + key;
      const auto& ms = s.at("metrics").at(key);
      if (!ms.contains("mean") || !ms.contains("std")) return "summary needs mean and std";
    }
  }
  return "";
}

}  // namespace dualtod::train
