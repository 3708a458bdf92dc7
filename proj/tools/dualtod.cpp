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

// dualtod: corpus generation, augmentation, pair building, training,
// evaluation and study reports.
#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dualtod/augment.hpp"
#include "dualtod/corpus.hpp"
#include "dualtod/dualdata.hpp"
#include "dualtod/error.hpp"
#include "dualtod/eval/cross_domain.hpp"
#include "dualtod/eval/evaluate.hpp"
#include "dualtod/generator.hpp"
#include "dualtod/io.hpp"
#include "dualtod/kb.hpp"
#include "dualtod/neural/checkpoint.hpp"
#include "dualtod/rng.hpp"
#include "dualtod/train/study.hpp"
#include "dualtod/train/train.hpp"
#include "dualtod/train/variants.hpp"

namespace fs = std::filesystem;
using namespace dualtod;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Flags {
  std::string config;
  std::uint64_t seed = 1;
  std::string out = ".";
  double fraction = 1.0;
  std::optional<std::size_t> m;
  std::string strategy = "para";
  std::string variant = "mdtod";
  std::string holdout;
  std::string data;
  std::string checkpoint;
  std::string resources;
  std::size_t dialogues = 0;
};

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string file_hash(const fs::path& p) { return hex64(hash_string(read_file(p))); }

class Run {
 public:
  Run(std::string command, const Flags& f) : command_(std::move(command)), flags_(f) {
    fs::create_directories(f.out);
  }

  void input(const fs::path& p) { inputs_.push_back({{"path", p.string()}, {"hash", file_hash(p)}}); }

  void write(const std::string& name, const std::string& content) {
    const fs::path p = fs::path(flags_.out) / name;
    write_file_atomic(p, content);
    outputs_.push_back({{"path", p.string()}, {"hash", hex64(hash_string(content))}});
  }

  void finish(const std::string& config_text) {
    OrderedJson m;
    m["command"] = command_;
    m["config_hash"] = hex64(hash_string(config_text));
    m["seeds"] = {{"seed", flags_.seed}};
    m["flags"] = {{"config", flags_.config},   {"out", flags_.out},
                  {"fraction", flags_.fraction}, {"m", flags_.m ? OrderedJson(*flags_.m) : OrderedJson(nullptr)},
                  {"strategy", flags_.strategy}, {"variant", flags_.variant},
                  {"holdout", flags_.holdout}, {"data", flags_.data},
                  {"checkpoint", flags_.checkpoint}};
    m["inputs"] = inputs_;
    m["outputs"] = outputs_;
    m["versions"] = {{"dualtod", kVersion},
                     {"checkpoint_format", nn::kCheckpointVersion}};
    m["wall_clock_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    write_file_atomic(fs::path(flags_.out) / "run_manifest.json", m.dump(2) + "\n");
  }

 private:
  std::string command_;
  Flags flags_;
  OrderedJson inputs_ = OrderedJson::array();
  OrderedJson outputs_ = OrderedJson::array();
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct Data {
  DialogueCorpus corpus;
  KnowledgeBase kb;
};

// A data directory as written by `gen`: schema.json, kb.json, corpus.jsonl.
Data load_data(const Flags& f, Run& run) {
  if (f.data.empty()) throw ConfigError("--data <dir> is required");
  const fs::path dir(f.data);
  for (const char* name : {"schema.json", "kb.json", "corpus.jsonl"}) {
    if (!fs::exists(dir / name))
      throw ConfigError("missing input file " + (dir / name).string());
    run.input(dir / name);
  }
  Data d;
  const OntologySchema schema = OntologySchema::load(dir / "schema.json");
  d.kb = KnowledgeBase::load(dir / "kb.json");
  d.corpus = load_corpus(dir / "corpus.jsonl", schema);
  fill_db(d.corpus, d.kb);
  return d;
}

AugmentResources load_resources(const Flags& f) {
  return AugmentResources::load(f.resources.empty() ? default_data_dir() : fs::path(f.resources));
}

train::TrainConfig load_train_config(const Flags& f) {
  if (f.config.empty()) return train::TrainConfig{};
  return train::TrainConfig::from_json(read_json_file(f.config));
}

void cmd_gen(const Flags& f) {
  Run run("gen", f);
  GeneratorConfig cfg = default_generator_config();
  if (!f.config.empty()) {
    run.input(f.config);
    cfg = GeneratorConfig::from_json(read_json_file(f.config));
  }
  if (f.dialogues > 0) cfg.num_dialogues = f.dialogues;
  cfg.validate();
  const DialogueCorpus corpus = generate_synthetic(cfg, f.seed);
  run.write("schema.json", corpus.schema.to_json().dump(2) + "\n");
  run.write("kb.json", build_kb(cfg).to_json().dump(2) + "\n");
  run.write("corpus.jsonl", corpus_to_jsonl(corpus));
  run.finish(cfg.to_json().dump());
}

void cmd_augment(const Flags& f) {
  Run run("augment", f);
  const Data d = load_data(f, run);
  const std::size_t m = f.m.value_or(1);
  const TrainingSet ts = build_training_set(d.corpus, d.kb, m, parse_strategy(f.strategy),
                                            f.seed, load_resources(f));
  std::string out;
  for (std::size_t i = 0; i < ts.audit.size(); ++i)
    out += paraphrase_set_to_json(ts.audit[i], ts.audit_keys[i].first,
                                  ts.audit_keys[i].second, i % 2 == 0 ? "user" : "response")
               .dump() +
           "\n";
  run.write("augment.jsonl", out);
  OrderedJson summary{{"m", m},
                      {"strategy", f.strategy},
                      {"turns", d.corpus.total_turns()},
                      {"shortfall_turns", ts.shortfall_turns}};
  run.write("augment_summary.json", summary.dump(2) + "\n");
  run.finish(summary.dump());
}

DialogueCorpus training_subset(const DialogueCorpus& corpus, const Flags& f) {
  if (!(f.fraction > 0.0 && f.fraction <= 1.0)) throw ConfigError("--fraction must lie in (0, 1]");
  return f.fraction < 1.0 ? subsample(corpus, f.fraction, f.seed) : corpus;
}

void cmd_pairs(const Flags& f) {
  Run run("pairs", f);
  const Data d = load_data(f, run);
  const DialogueCorpus sub = training_subset(d.corpus, f);
  const std::size_t m = f.m.value_or(0);
  const TrainingSet ts =
      build_training_set(sub, d.kb, m, parse_strategy(f.strategy), f.seed, load_resources(f));
  run.write("pairs.jsonl", pairs_to_jsonl(ts.pairs));
  run.finish(OrderedJson{{"m", m}, {"strategy", f.strategy}, {"fraction", f.fraction}}.dump());
}

void cmd_train(const Flags& f) {
  Run run("train", f);
  if (!f.config.empty()) run.input(f.config);
  const Data d = load_data(f, run);
  train::TrainConfig cfg = train::apply_variant(load_train_config(f), f.variant);
  if (f.m) cfg.m_override = *f.m;
  if (!f.strategy.empty()) cfg.augment_strategy = parse_strategy(f.strategy);
  cfg.seed = f.seed;
  const DialogueCorpus sub = training_subset(d.corpus, f);
  const std::size_t m = cfg.m_at(f.fraction);
  const TrainingSet ts =
      build_training_set(sub, d.kb, m, cfg.augment_strategy, f.seed, load_resources(f));
  const nn::Vocab vocab = nn::Vocab::build(ts.pairs, 1, train::ontology_tokens(sub.schema));
  cfg.model.vocab_size = vocab.size();
  cfg.model.init_seed = f.seed;
  nn::Seq2SeqModel model(cfg.model);
  const OrderedJson meta{{"variant", f.variant}, {"fraction", f.fraction}, {"seed", f.seed}, {"m", m}};

  train::TrainHooks hooks;
  hooks.on_abort = [&](const nn::Seq2SeqModel& last_good) {
    run.write("last_good.ckpt", nn::serialize_checkpoint(last_good, vocab, meta));
  };
  const train::TrainLog log = train::train(model, vocab, ts.pairs, cfg, hooks);
  run.write("model.ckpt", nn::serialize_checkpoint(model, vocab, meta));
  OrderedJson lj = log.to_json();
  lj["meta"] = meta;
  lj["config"] = cfg.to_json();
  run.write("train_log.json", lj.dump(2) + "\n");
  run.finish(cfg.to_json().dump());
}

void cmd_eval(const Flags& f) {
  Run run("eval", f);
  if (f.checkpoint.empty()) throw ConfigError("--checkpoint <file> is required");
  if (!fs::exists(f.checkpoint)) throw ConfigError("missing input file " + f.checkpoint);
  run.input(f.checkpoint);
  const Data d = load_data(f, run);
  const nn::Checkpoint ck = nn::load_checkpoint(f.checkpoint);
  eval::Evaluation ev = eval::evaluate_model(ck.model, ck.vocab, d.corpus, d.kb);
  ev.report.meta = {{"variant", ck.meta.value("variant", f.variant)},
                    {"fraction", ck.meta.value("fraction", f.fraction)},
                    {"seed", ck.meta.value("seed", f.seed)}};
  run.write("metrics.json", ev.report.to_json().dump(2) + "\n");
  run.write("predictions.json", eval::predictions_to_json(ev.predictions).dump(1) + "\n");
  run.finish("");
}

void cmd_study(const Flags& f) {
  Run run("study", f);
  if (!f.config.empty()) run.input(f.config);
  const Data d = load_data(f, run);
  const Json raw = f.config.empty() ? Json::object() : read_json_file(f.config);
  if (!f.holdout.empty()) {
    eval::CrossDomainConfig cfg = eval::CrossDomainConfig::from_json(raw);
    cfg.holdout = f.holdout;
    cfg.seed = f.seed;
    if (f.m) cfg.ms = {*f.m};
    const OrderedJson report = eval::cross_domain_eval(d.corpus, d.kb, cfg, load_resources(f));
    run.write("cross_domain_report.json", report.dump(2) + "\n");
    run.finish(cfg.to_json().dump());
    return;
  }
  train::StudyConfig cfg = train::StudyConfig::from_json(raw);
  const OrderedJson report = train::run_low_resource_study(d.corpus, d.kb, cfg, load_resources(f));
  run.write("study_report.json", report.dump(2) + "\n");
  run.finish(cfg.to_json().dump());
}

int exit_code_for(const std::string& kind) {
  if (kind == "config_error" || kind == "precondition") return 2;
  if (kind == "parse_error" || kind == "schema_violation") return 3;
  if (kind == "numeric_error") return 4;
  return 1;
}

void report_error(const std::string& command, const std::string& kind,
                  const std::string& message, const Flags& f) {
  OrderedJson err{{"status", "error"}, {"command", command}, {"kind", kind}, {"message", message}};
  std::cerr << err.dump() << "\n";
  try {
    if (!f.out.empty() && fs::is_directory(f.out))
      write_file_atomic(fs::path(f.out) / "error.json", err.dump(2) + "\n");
  } catch (...) {
    // The stderr record is the primary channel.
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multijugate dual learning lab for task-oriented dialogue"};
  app.require_subcommand(1);
  Flags f;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "JSON config file");
    sub->add_option("--seed", f.seed, "Seed");
    sub->add_option("--out", f.out, "Output directory");
  };
  auto data_flags = [&](CLI::App* sub) {
    sub->add_option("--data", f.data, "Directory written by gen");
    sub->add_option("--resources", f.resources, "Thesaurus/fluency directory");
  };
  auto aug_flags = [&](CLI::App* sub) {
    sub->add_option("--m", f.m, "Rewrites per turn");
    sub->add_option("--strategy", f.strategy, "para|eda|syn")
        ->check(CLI::IsMember({"para", "eda", "syn"}));
  };
  auto variant_flag = [&](CLI::App* sub) {
    sub->add_option("--variant", f.variant, "Model variant")
        ->check(CLI::IsMember(train::variant_names()));
  };

  CLI::App* gen = app.add_subcommand("gen", "Generate a synthetic corpus and KB");
  common(gen);
  gen->add_option("--dialogues", f.dialogues, "Override the dialogue count");

  CLI::App* augment = app.add_subcommand("augment", "Dump constraint-preserving rewrites");
  common(augment);
  data_flags(augment);
  aug_flags(augment);

  CLI::App* pairs = app.add_subcommand("pairs", "Build dual training pairs");
  common(pairs);
  data_flags(pairs);
  aug_flags(pairs);
  pairs->add_option("--fraction", f.fraction, "Training fraction");

  CLI::App* trn = app.add_subcommand("train", "Train a model");
  common(trn);
  data_flags(trn);
  aug_flags(trn);
  variant_flag(trn);
  trn->add_option("--fraction", f.fraction, "Training fraction");

  CLI::App* ev = app.add_subcommand("eval", "Evaluate a checkpoint");
  common(ev);
  data_flags(ev);
  variant_flag(ev);
  ev->add_option("--fraction", f.fraction, "Fraction recorded in the report");
  ev->add_option("--checkpoint", f.checkpoint, "Checkpoint file");

  CLI::App* study = app.add_subcommand("study", "Low-resource study or cross-domain run");
  common(study);
  data_flags(study);
  study->add_option("--m", f.m, "Single rewrite count for a cross-domain run");
  study->add_option("--holdout", f.holdout, "Leave-one-domain-out holdout domain");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (command == "gen") cmd_gen(f);
    else if (command == "augment") cmd_augment(f);
    else if (command == "pairs") cmd_pairs(f);
    else if (command == "train") cmd_train(f);
    else if (command == "eval") cmd_eval(f);
    else if (command == "study") cmd_study(f);
  } catch (const Error& e) {
    report_error(command, e.kind(), e.what(), f);
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    report_error(command, "failed_run", e.what(), f);
    return 1;
  }
  return 0;
}
