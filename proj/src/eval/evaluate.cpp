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

#include "dualtod/eval/evaluate.hpp"

#include "dualtod/dualdata.hpp"
#include "dualtod/error.hpp"
#include "dualtod/neural/decode.hpp"

namespace dualtod::eval {

Evaluation evaluate_model(const nn::Seq2SeqModel& model, const nn::Vocab& vocab,
                          const DialogueCorpus& corpus, const KnowledgeBase& kb,
                          std::size_t max_len) {
  Evaluation ev;
  std::vector<BeliefState> pred_beliefs, gold_beliefs;
  std::vector<Tokens> hyps, refs;
  std::vector<DialogueOutcome> outcomes;
  std::vector<Goal> goals;
  for (const Dialogue& d : corpus.dialogues) {
    DialogueOutcome outcome;
    for (std::size_t t = 0; t < d.turns.size(); ++t) {
      const Turn& turn = d.turns[t];
      const Context ctx = build_context(d, t);
      const TrainingPair fwd = make_forward_pair(
          ctx, DialogueState{turn.belief, turn.db}, turn.system_response_delex);
      nn::InferResult r = nn::two_phase_infer(model, vocab, fwd.input, kb, max_len);

      pred_beliefs.push_back(r.belief);
      gold_beliefs.push_back(turn.belief);
      hyps.push_back(r.response);
      refs.push_back(turn.system_response_delex);
      for (const auto& tok : r.response) {
        if (!is_placeholder(tok)) continue;
        const std::string slot(placeholder_slot(tok));
        outcome.provided_slots.insert(slot);
        if (slot == "name" && r.db.selected && r.db.domain)
          outcome.offered.push_back({*r.db.domain, *r.db.selected});
      }
      ev.predictions.push_back({d.dialogue_id, t, r.belief, r.db, r.response});
    }
    outcomes.push_back(std::move(outcome));
    goals.push_back(d.goal);
  }

  MetricsReport& m = ev.report;
  m.dialogues = corpus.dialogues.size();
  m.turns = gold_beliefs.size();
  m.jga = jga(pred_beliefs, gold_beliefs);
  m.bleu = hyps.empty() ? 0.0 : bleu(hyps, refs);
  const InformSuccess is = inform_success(outcomes, goals);
  m.inform = is.inform;
  m.success = is.success;
  m.combined = combined(m.inform, m.success, m.bleu);
  m.goal_score = goal_score(m.inform, m.success);
  return ev;
}

OrderedJson predictions_to_json(const std::vector<TurnPrediction>& predictions) {
  OrderedJson arr = OrderedJson::array();
  for (const auto& p : predictions)
    arr.push_back({{"id", p.dialogue_id},
                   {"t", p.t},
                   {"belief", join(serialize_belief(p.belief))},
                   {"db", bucket_token(p.db.bucket)},
                   {"response", join(p.response)}});
  return arr;
}

}  // namespace dualtod::eval
