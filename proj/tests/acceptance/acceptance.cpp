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

// Acceptance run: one PASS/FAIL line per criterion. Reports from the long
// criteria are written to --out (default: ./acceptance_out).
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "dualtod/augment.hpp"
#include "dualtod/dualdata.hpp"
#include "dualtod/eval/cross_domain.hpp"
#include "dualtod/eval/evaluate.hpp"
#include "dualtod/eval/metrics.hpp"
#include "dualtod/generator.hpp"
#include "dualtod/neural/checkpoint.hpp"
#include "dualtod/neural/decode.hpp"
#include "dualtod/neural/gradient_check.hpp"
#include "dualtod/rng.hpp"
#include "dualtod/train/study.hpp"
#include "dualtod/train/train.hpp"
#include "dualtod/train/variants.hpp"

using namespace dualtod;
namespace fs = std::filesystem;
namespace tr = dualtod::train;

namespace {

// Tolerances and budgets.
constexpr double kCombinedTol = 0.01;
constexpr double kBleuTol = 1e-9;
constexpr double kGradTol = 1e-3;
constexpr double kLinearGradTol = 1e-6;
constexpr std::size_t kSanityMaxParams = 10000;
constexpr double kObjectiveTol = 1e-12;
constexpr std::size_t kPairCorpora = 100;
constexpr std::size_t kMinVariants = 1000;
constexpr double kOverfitAccuracy = 0.99;
constexpr std::size_t kOverfitMaxSteps = 2000;
constexpr double kOverfitSeconds = 300.0;
constexpr double kStudySeconds = 1800.0;
constexpr double kCrossDomainSeconds = 1200.0;
// Per-cell step cap for the study and the cross-domain sweep.
constexpr std::size_t kStudySteps = 1500;
constexpr std::size_t kStudyTestDialogues = 40;
constexpr std::size_t kCrossSteps = 1500;
constexpr std::size_t kCrossEvalDialogues = 40;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x, int prec = 6) {
  std::ostringstream os;
  os.precision(prec);
  os << x;
  return os.str();
}

const AugmentResources& resources() {
  static const AugmentResources res = AugmentResources::load(default_data_dir());
  return res;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- 1 --------------------------------------------------------------------

Outcome combined_arithmetic() {
  const double a = eval::combined(85.65, 62.20, 15.24);
  const double b = eval::combined(82.00, 64.00, 14.48);
  const bool ok = std::abs(a - 89.165) < 1e-9 && std::abs(b - 87.48) < 1e-9 &&
                  std::abs(a - 89.16) <= kCombinedTol + 1e-12 &&
                  std::abs(b - 87.49) <= kCombinedTol + 1e-12;
  return {ok, "combined " + fmt(a) + " vs 89.16, " + fmt(b) + " vs 87.49"};
}

// ---- 2 --------------------------------------------------------------------

std::string fold(const std::string& s) {
  std::string o = s;
  for (char& c : o) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return o;
}

// Clipped n-gram matching by exhaustive pairing.
double oracle_bleu(const std::vector<Tokens>& hyp, const std::vector<Tokens>& ref) {
  double m[4] = {0, 0, 0, 0}, t[4] = {0, 0, 0, 0}, c = 0, r = 0;
  for (std::size_t s = 0; s < hyp.size(); ++s) {
    const Tokens& h = hyp[s];
    const Tokens& rf = ref[s];
    c += static_cast<double>(h.size());
    r += static_cast<double>(rf.size());
    for (std::size_t n = 1; n <= 4; ++n) {
      if (h.size() < n) continue;
      std::vector<bool> used(rf.size() >= n ? rf.size() - n + 1 : 0, false);
      for (std::size_t i = 0; i + n <= h.size(); ++i) {
        t[n - 1] += 1;
        for (std::size_t j = 0; j < used.size(); ++j) {
          if (used[j]) continue;
          bool eq = true;
          for (std::size_t k = 0; k < n && eq; ++k) eq = fold(h[i + k]) == fold(rf[j + k]);
          if (eq) {
            used[j] = true;
            m[n - 1] += 1;
            break;
          }
        }
      }
    }
  }
  double prod = 1.0;
  int orders = 0;
  for (int n = 0; n < 4; ++n) {
    if (t[n] == 0) continue;
    if (m[n] == 0) return 0.0;
    prod *= m[n] / t[n];
    ++orders;
  }
  if (orders == 0) return 0.0;
  return 100.0 * (c < r ? std::exp(1.0 - r / c) : 1.0) * std::pow(prod, 1.0 / orders);
}

Outcome metric_oracles() {
  std::vector<std::string> problems;
  const std::vector<Tokens> h{split_ws("i have booked [value_name] for you ."), split_ws("goodbye")};
  if (eval::bleu(h, h) != 100.0) problems.push_back("bleu(h,h)");
  if (eval::bleu({split_ws("a b c d e")}, {split_ws("v w x y z")}) != 0.0) problems.push_back("disjoint bleu");
  Rng rng(7);
  const std::vector<std::string> words{"the", "hotel", "is", "The", "north", "cheap", "."};
  double worst = 0.0;
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Tokens> hy, rf;
    for (std::size_t s = 1 + rng.below(3); s > 0; --s) {
      Tokens a, b;
      for (std::size_t k = 1 + rng.below(9); k > 0; --k) a.push_back(rng.pick(words));
      for (std::size_t k = 1 + rng.below(9); k > 0; --k) b.push_back(rng.pick(words));
      hy.push_back(a);
      rf.push_back(b);
    }
    worst = std::max(worst, std::abs(eval::bleu(hy, rf) - oracle_bleu(hy, rf)));
  }
  if (worst > kBleuTol) problems.push_back("bleu oracle gap " + fmt(worst));

  BeliefState a, b, wrong, superset;
  a.set("hotel", "area", "north");
  b.set("restaurant", "food", "chinese");
  wrong.set("restaurant", "food", "indian");
  superset = a;
  superset.set("hotel", "stars", "4");
  if (eval::jga({a, b}, {a, b}) != 1.0) problems.push_back("jga all-correct");
  if (eval::jga({a, wrong}, {a, b}) != 0.5) problems.push_back("jga half");
  if (eval::jga({superset}, {a}) != 0.0) problems.push_back("jga superset");
  std::string detail = "max |bleu - oracle| = " + fmt(worst, 3);
  for (const auto& p : problems) detail += "; failed: " + p;
  return {problems.empty(), detail};
}

// ---- 3 --------------------------------------------------------------------

nn::Batch id_batch(const std::vector<std::vector<nn::TokenId>>& src,
                   const std::vector<std::vector<nn::TokenId>>& tgt) {
  std::vector<TrainingPair> pairs;
  std::vector<std::string> toks = nn::Vocab::reserved_tokens();
  std::size_t maxid = 0;
  for (const auto& s : src)
    for (auto t : s) maxid = std::max(maxid, static_cast<std::size_t>(t));
  for (const auto& s : tgt)
    for (auto t : s) maxid = std::max(maxid, static_cast<std::size_t>(t));
  while (toks.size() <= maxid) toks.push_back("w" + std::to_string(toks.size()));
  const nn::Vocab v(toks);
  for (std::size_t i = 0; i < src.size(); ++i) {
    TrainingPair p;
    p.input = v.decode(src[i]);
    p.target = v.decode(tgt[i]);
    pairs.push_back(p);
  }
  return nn::make_batch(pairs, v);
}

Outcome gradient_fidelity() {
  nn::ModelConfig c;
  c.vocab_size = 20;
  c.d_model = 16;
  c.n_heads = 2;
  c.d_ff = 32;
  c.enc_layers = 1;
  c.dec_layers = 1;
  c.max_positions = 32;
  c.init_seed = 7;
  const nn::Seq2SeqModel m(c);
  const nn::Batch b = id_batch({{13, 15, 17, 19}, {14, 14, 11}}, {{16, 18, 1}, {12, 13, 14, 1}});
  const auto r = nn::gradient_check(m, b, 1e-5);

  nn::ModelConfig lc;
  lc.vocab_size = 20;
  lc.d_model = 4;
  lc.n_heads = 1;
  lc.d_ff = 4;
  lc.enc_layers = 0;
  lc.dec_layers = 0;
  lc.final_norm = false;
  lc.max_positions = 16;
  lc.init_seed = 3;
  const nn::Seq2SeqModel lm(lc);
  const auto lr = nn::gradient_check(lm, id_batch({{13}}, {{15, 16, 17, 1}}), 1e-5);

  const bool ok = m.num_params() <= kSanityMaxParams && r.coords_checked == m.num_params() &&
                  r.max_rel_error < kGradTol && lr.max_rel_error < kLinearGradTol;
  return {ok, "sanity model " + std::to_string(m.num_params()) + " params, max rel err " +
                  fmt(r.max_rel_error, 3) + " (" + r.worst_block + "); linear " + fmt(lr.max_rel_error, 3)};
}

// ---- 4 --------------------------------------------------------------------

// Mean token NLL of one direction, decoding step by step.
double stepwise_nll(const nn::Seq2SeqModel& m, const nn::Vocab& v, const std::vector<TrainingPair>& pairs) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& p : pairs) {
    const auto src = v.encode(p.input);
    const auto tgt = v.encode(p.target);
    const auto enc = m.encode(src);
    std::vector<nn::TokenId> prefix{nn::Vocab::kPad};
    for (nn::TokenId t : tgt) {
      sum -= m.next_log_probs(enc, prefix)[static_cast<std::size_t>(t)];
      prefix.push_back(t);
      ++n;
    }
  }
  return sum / static_cast<double>(n);
}

Outcome objective_equivalence() {
  GeneratorConfig gc = default_generator_config();
  gc.num_dialogues = 3;
  const DialogueCorpus corpus = generate_synthetic(gc, 2);
  const auto pairs = build_training_set(corpus, build_kb(gc), 0, Strategy::kPara, 0, resources()).pairs;
  const nn::Vocab v = nn::Vocab::build(pairs);
  nn::ModelConfig c;
  c.vocab_size = v.size();
  c.init_seed = 5;
  const nn::Seq2SeqModel m(c);
  std::vector<TrainingPair> by[3];
  for (const auto& p : pairs)
    if (by[static_cast<int>(p.direction)].size() < 6) by[static_cast<int>(p.direction)].push_back(p);
  const nn::Batch bf = nn::make_batch(by[0], v), bb = nn::make_batch(by[1], v), br = nn::make_batch(by[2], v);
  const double fused = tr::dual_loss(m, bf, bb, br, {1, 1, 1});
  const double ref = stepwise_nll(m, v, by[0]) + stepwise_nll(m, v, by[1]) + stepwise_nll(m, v, by[2]);
  const double fwd_only = tr::dual_loss(m, bf, bb, br, {1, 0, 0});
  const bool ok = std::abs(fused - ref) < kObjectiveTol && fwd_only == nn::nll(m, bf);
  return {ok, "|dual - reference| = " + fmt(std::abs(fused - ref), 3) +
                  ", (1,0,0) == forward nll: " + (fwd_only == nn::nll(m, bf) ? "yes" : "no")};
}

// ---- 5 --------------------------------------------------------------------

Outcome pair_count_law() {
  GeneratorConfig gc = default_generator_config();
  const KnowledgeBase kb = build_kb(gc);
  Rng rng(404);
  std::size_t checked = 0, violations = 0, shortfalls = 0;
  for (std::size_t i = 0; i < kPairCorpora; ++i) {
    gc.num_dialogues = 2 + rng.below(5);
    const DialogueCorpus corpus = generate_synthetic(gc, 1000 + i);
    std::size_t turns = 0;
    for (const auto& d : corpus.dialogues) turns += d.turns.size();
    for (std::size_t m = 0; m <= 2; ++m) {
      const TrainingSet ts = build_training_set(corpus, kb, m, Strategy::kPara, i, resources());
      ++checked;
      if (ts.shortfall_turns) ++shortfalls;
      if (ts.pairs.size() != 3 * (1 + m) * turns) ++violations;
    }
  }
  return {violations == 0 && shortfalls == 0,
          std::to_string(checked) + " (corpus, m) cases, " + std::to_string(violations) + " violations, " +
              std::to_string(shortfalls) + " with rewrite shortfall"};
}

// ---- 6 --------------------------------------------------------------------

Outcome constraint_preservation() {
  GeneratorConfig gc = default_generator_config();
  gc.num_dialogues = 60;
  const DialogueCorpus corpus = generate_synthetic(gc, 66);
  const KnowledgeBase kb = build_kb(gc);
  std::size_t variants = 0, bad = 0, exceptions = 0;
  std::size_t per[3] = {0, 0, 0};
  for (Strategy s : {Strategy::kPara, Strategy::kEda, Strategy::kSyn}) {
    for (const Dialogue& d : corpus.dialogues) {
      for (const Turn& t : d.turns) {
        try {
          const DialogueState st{t.belief, query(kb, t.belief)};
          const TurnExpansion e = expand_turn(t, st, 2, s, variants + 17, resources());
          for (const ParaphraseSet* set : {&e.user_set, &e.response_set}) {
            for (const Tokens& v : set->variants) {
              ++variants;
              ++per[static_cast<int>(s)];
              if (!constraint_check(v, set->constraints)) ++bad;
            }
          }
        } catch (const std::exception&) {
          ++exceptions;
        }
      }
    }
  }
  const bool ok = variants >= kMinVariants && bad == 0 && exceptions == 0;
  return {ok, std::to_string(variants) + " variants (para " + std::to_string(per[0]) + ", eda " +
                  std::to_string(per[1]) + ", syn " + std::to_string(per[2]) + "), " + std::to_string(bad) +
                  " violations, " + std::to_string(exceptions) + " exceptions"};
}

// ---- 7 --------------------------------------------------------------------

double train_jga(const nn::Seq2SeqModel& m, const nn::Vocab& v, const std::vector<TrainingPair>& fwd,
                 const KnowledgeBase& kb) {
  std::size_t ok = 0;
  for (const auto& p : fwd) {
    const auto r = nn::two_phase_infer(m, v, p.input, kb);
    const auto db = std::find(p.target.begin(), p.target.end(), kDbMarker);
    ok += parse_belief(Tokens(p.target.begin() + 1, db)) == r.belief;
  }
  return static_cast<double>(ok) / static_cast<double>(fwd.size());
}

Outcome overfit_smoke() {
  const auto t0 = std::chrono::steady_clock::now();
  GeneratorConfig gc = default_generator_config();
  gc.num_dialogues = 16;
  const DialogueCorpus corpus = generate_synthetic(gc, 1);
  const KnowledgeBase kb = build_kb(gc);
  const auto pairs = build_training_set(corpus, kb, 0, Strategy::kPara, 1, resources()).pairs;
  const nn::Vocab v = nn::Vocab::build(pairs);
  tr::TrainConfig cfg;
  cfg.epochs = 100000;
  cfg.max_steps = kOverfitMaxSteps;
  cfg.model.vocab_size = v.size();
  nn::Seq2SeqModel m(cfg.model);
  std::vector<TrainingPair> fwd;
  for (const auto& p : pairs)
    if (p.direction == Direction::kFwd) fwd.push_back(p);
  const nn::Batch all_fwd = nn::make_batch(fwd, v);

  double acc = 0.0, jga = 0.0;
  std::size_t steps = 0;
  tr::TrainHooks hooks;
  hooks.stop = [&](const tr::StepRecord& r) {
    steps = r.step;
    if (r.step % 50 != 0 && r.step != kOverfitMaxSteps) return false;
    const auto s = nn::batch_stats(m, all_fwd);
    acc = static_cast<double>(s.correct) / static_cast<double>(s.tokens);
    if (acc < kOverfitAccuracy) return false;
    jga = train_jga(m, v, fwd, kb);
    return jga == 1.0;
  };
  tr::train(m, v, pairs, cfg, hooks);
  const double secs = seconds_since(t0);
  const bool ok = acc >= kOverfitAccuracy && jga == 1.0 && steps <= kOverfitMaxSteps && secs < kOverfitSeconds;
  return {ok, "forward token accuracy " + fmt(acc, 4) + ", training JGA " + fmt(jga, 4) + " after " +
                  std::to_string(steps) + " steps, " + fmt(secs, 4) + " s"};
}

// ---- 8 --------------------------------------------------------------------

struct PipelineBytes {
  std::string checkpoint, pairs, metrics;
};

PipelineBytes run_pipeline() {
  GeneratorConfig gc = default_generator_config();
  gc.num_dialogues = 10;
  const DialogueCorpus corpus = generate_synthetic(gc, 8);
  const KnowledgeBase kb = build_kb(gc);
  tr::TrainConfig cfg = tr::apply_variant(tr::TrainConfig{}, "mdtod");
  cfg.max_steps = 20;
  cfg.seed = 8;
  cfg.model.d_model = 32;
  cfg.model.d_ff = 64;
  const auto ts = build_training_set(corpus, kb, 1, cfg.augment_strategy, cfg.seed, resources());
  const nn::Vocab v = nn::Vocab::build(ts.pairs, 1, tr::ontology_tokens(corpus.schema));
  cfg.model.vocab_size = v.size();
  cfg.model.init_seed = cfg.seed;
  nn::Seq2SeqModel m(cfg.model);
  tr::train(m, v, ts.pairs, cfg);
  PipelineBytes out;
  out.checkpoint = nn::serialize_checkpoint(m, v);
  out.pairs = pairs_to_jsonl(ts.pairs);
  DialogueCorpus test = corpus;
  test.dialogues.resize(3);
  out.metrics = eval::evaluate_model(m, v, test, kb, 60).report.to_json().dump();
  return out;
}

Outcome determinism() {
  const PipelineBytes a = run_pipeline();
  const PipelineBytes b = run_pipeline();
  const bool ck = a.checkpoint == b.checkpoint, pr = a.pairs == b.pairs, me = a.metrics == b.metrics;
  return {ck && pr && me, std::string("checkpoint ") + (ck ? "identical" : "DIFFERS") + " (" +
                              std::to_string(a.checkpoint.size()) + " bytes), pairs " +
                              (pr ? "identical" : "DIFFER") + ", metrics " + (me ? "identical" : "DIFFER")};
}

// ---- 9 --------------------------------------------------------------------

void write_json(const fs::path& path, const OrderedJson& j) {
  fs::create_directories(path.parent_path());
  write_file_atomic(path, j.dump(2) + "\n");
}

Outcome low_resource_study(const fs::path& out) {
  const auto t0 = std::chrono::steady_clock::now();
  GeneratorConfig gc = default_generator_config();
  gc.num_dialogues = 400;
  const DialogueCorpus corpus = generate_synthetic(gc, 0);
  tr::StudyConfig cfg;
  cfg.fractions = {0.1};
  cfg.seeds = {1, 2, 3};
  cfg.variants = {"baseline", "dl", "mdtod"};
  cfg.max_test_dialogues = kStudyTestDialogues;
  cfg.train.epochs = 100000;
  cfg.train.max_steps = kStudySteps;
  cfg.train.m_override = 2;
  const OrderedJson report = tr::run_low_resource_study(corpus, build_kb(gc), cfg, resources());
  write_json(out / "study_report.json", report);
  const double secs = seconds_since(t0);
  const std::string problem = tr::validate_study_report(Json::parse(report.dump()));

  std::string detail = std::to_string(report["cells"].size()) + " cells in " + fmt(secs, 4) + " s";
  for (const auto& row : report["summary"]) {
    const auto& c = row["metrics"]["combined"];
    detail += "; " + row["variant"].get<std::string>() + " combined " + fmt(c["mean"].get<double>(), 4) +
              " +- " + fmt(c["std"].get<double>(), 3);
  }
  double best_dual = -1e300, base = 0.0;
  for (const auto& row : report["summary"]) {
    const double mean = row["metrics"]["combined"]["mean"].get<double>();
    if (row["variant"] == "baseline")
      base = mean;
    else
      best_dual = std::max(best_dual, mean);
  }
  detail += std::string("; dual >= baseline: ") + (best_dual >= base ? "yes" : "no") + " (reported, not gated)";
  if (!problem.empty()) detail += "; schema: " + problem;
  return {problem.empty() && report["cells"].size() == 9 && secs < kStudySeconds, detail};
}

// ---- 10 -------------------------------------------------------------------

Outcome cross_domain(const fs::path& out) {
  const auto t0 = std::chrono::steady_clock::now();
  GeneratorConfig gc = default_generator_config();
  gc.num_dialogues = 400;
  const DialogueCorpus corpus = generate_synthetic(gc, 0);
  eval::CrossDomainConfig cfg;
  cfg.holdout = "hotel";
  cfg.ms = {0, 1, 2};
  cfg.seed = 1;
  cfg.max_eval_dialogues = kCrossEvalDialogues;
  cfg.train.epochs = 100000;
  cfg.train.max_steps = kCrossSteps;
  const OrderedJson report = eval::cross_domain_eval(corpus, build_kb(gc), cfg, resources());
  write_json(out / "cross_domain_report.json", report);
  const double secs = seconds_since(t0);
  const std::string problem = eval::validate_cross_domain_report(Json::parse(report.dump()));
  const bool leak_free = report["audit"]["zero_leakage"].get<bool>();
  std::string detail = "holdout hotel, " + fmt(secs, 4) + " s, zero leakage: " + (leak_free ? "yes" : "no");
  for (const auto& row : report["rows"])
    detail += "; m=" + std::to_string(row["m"].get<int>()) + " goal " + fmt(row["goal_score"].get<double>(), 4) +
              " bleu " + fmt(row["bleu"].get<double>(), 4);
  if (!problem.empty()) detail += "; schema: " + problem;
  return {problem.empty() && leak_free && report["rows"].size() == 3 && secs < kCrossDomainSeconds, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only;
  std::string out = "acceptance_out";
  app.add_option("--only", only, "Run only these criteria (1-10)");
  app.add_option("--out", out, "Directory for study and cross-domain reports");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"combined-score arithmetic", combined_arithmetic},
      {"metric oracles", metric_oracles},
      {"gradient fidelity", gradient_fidelity},
      {"objective equivalence", objective_equivalence},
      {"pair-count law", pair_count_law},
      {"constraint preservation", constraint_preservation},
      {"overfit smoke test", overfit_smoke},
      {"determinism", determinism},
      {"low-resource study", [&] { return low_resource_study(out); }},
      {"cross-domain harness", [&] { return cross_domain(out); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << criteria[i].first << ": " << o.detail
              << " (" << fmt(seconds_since(t0), 4) << " s)" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
