#include "ndm/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <stdexcept>

namespace ndm {

nlohmann::json Prf::to_json() const {
  return {{"tp", tp}, {"fp", fp}, {"fn", fn}, {"precision", precision()}, {"recall", recall()}, {"f1", f1()}};
}

TrackerPrf tracker_prf(const std::vector<TurnLabels>& predictions, const std::vector<TurnLabels>& labels,
                       const Ontology& ontology) {
  if (predictions.size() != labels.size()) throw std::invalid_argument("prediction and label counts differ");
  TrackerPrf out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (const auto& slot : ontology.informable()) {
      auto get = [&](const TurnLabels& l) {
        auto it = l.informable.find(slot.name);
        return it == l.informable.end() ? std::string(kNotMentioned) : it->second;
      };
      const auto p = get(predictions[i]), g = get(labels[i]);
      const bool pred = p != kNotMentioned, gold = g != kNotMentioned;
      if (pred && p == g) {
        ++out.informable.tp;
        continue;
      }
      if (pred) ++out.informable.fp;
      if (gold) ++out.informable.fn;
    }
    for (const auto& r : ontology.requestable()) {
      const bool pred = predictions[i].requested.count(r) != 0, gold = labels[i].requested.count(r) != 0;
      if (pred && gold) ++out.requestable.tp;
      if (pred && !gold) ++out.requestable.fp;
      if (!pred && gold) ++out.requestable.fn;
    }
  }
  return out;
}

TurnLabels belief_labels(const BeliefState& belief, const Ontology& ontology) {
  TurnLabels l;
  for (std::size_t s = 0; s < ontology.informable().size(); ++s) {
    const auto& slot = ontology.informable()[s];
    const std::size_t a = belief.argmax(s);
    if (a < slot.values.size()) {
      l.informable[slot.name] = slot.values[a];
    } else {
      l.informable[slot.name] = a == BeliefState::dontcare_index(slot.values.size()) ? kDontCare : kNotMentioned;
    }
  }
  for (std::size_t r = 0; r < ontology.requestable().size(); ++r) {
    if (belief.requested(r)) l.requested.insert(ontology.requestable()[r]);
  }
  return l;
}

// BLEU

BleuStats& BleuStats::operator+=(const BleuStats& o) {
  for (std::size_t n = 0; n < 4; ++n) {
    match[n] += o.match[n];
    total[n] += o.total[n];
  }
  candidate_length += o.candidate_length;
  reference_length += o.reference_length;
  return *this;
}

namespace {

std::map<Tokens, std::size_t> ngram_counts(const Tokens& t, std::size_t n) {
  std::map<Tokens, std::size_t> c;
  for (std::size_t i = 0; i + n <= t.size(); ++i) ++c[Tokens(t.begin() + i, t.begin() + i + n)];
  return c;
}

double brevity(std::size_t c, std::size_t r) {
  if (c == 0) return 0.0;
  return c > r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
}

}  // namespace

BleuStats bleu_stats(const Tokens& candidate, const Tokens& reference) {
  BleuStats s;
  s.candidate_length = candidate.size();
  s.reference_length = reference.size();
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto c = ngram_counts(candidate, n);
    const auto r = ngram_counts(reference, n);
    for (const auto& [g, k] : c) {
      auto it = r.find(g);
      s.match[n - 1] += it == r.end() ? 0 : std::min(k, it->second);
      s.total[n - 1] += k;
    }
  }
  return s;
}

double bleu_score(const BleuStats& s) {
  double log_sum = 0.0;
  for (std::size_t n = 0; n < 4; ++n) {
    if (s.match[n] == 0 || s.total[n] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(s.match[n]) / static_cast<double>(s.total[n]));
  }
  return brevity(s.candidate_length, s.reference_length) * std::exp(log_sum / 4.0);
}

double corpus_bleu(const std::vector<Tokens>& candidates, const std::vector<Tokens>& references) {
  if (candidates.size() != references.size()) throw std::invalid_argument("candidate and reference counts differ");
  BleuStats s;
  for (std::size_t i = 0; i < candidates.size(); ++i) s += bleu_stats(candidates[i], references[i]);
  return bleu_score(s);
}

double sentence_bleu(const Tokens& candidate, const Tokens& reference) {
  const auto s = bleu_stats(candidate, reference);
  if (s.match[0] == 0) return 0.0;
  double log_sum = std::log(static_cast<double>(s.match[0]) / static_cast<double>(s.total[0]));
  for (std::size_t n = 1; n < 4; ++n) {
    log_sum += std::log((static_cast<double>(s.match[n]) + 1.0) / (static_cast<double>(s.total[n]) + 1.0));
  }
  return brevity(s.candidate_length, s.reference_length) * std::exp(log_sum / 4.0);
}

BleuResult bleu(const std::vector<std::vector<Tokens>>& ranked, const std::vector<Tokens>& references) {
  if (ranked.size() != references.size()) throw std::invalid_argument("candidate and reference counts differ");
  BleuResult out;
  BleuStats top1, top5;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (references[i].empty()) {
      ++out.skipped;
      continue;
    }
    ++out.turns;
    static const Tokens kEmpty;
    const Tokens& first = ranked[i].empty() ? kEmpty : ranked[i][0];
    top1 += bleu_stats(first, references[i]);
    const Tokens* best = &first;
    double best_score = -1.0;
    for (std::size_t k = 0; k < std::min<std::size_t>(5, ranked[i].size()); ++k) {
      const double b = sentence_bleu(ranked[i][k], references[i]);
      if (b > best_score) {
        best_score = b;
        best = &ranked[i][k];
      }
    }
    top5 += bleu_stats(*best, references[i]);
  }
  out.t1 = bleu_score(top1);
  out.t5 = bleu_score(top5);
  return out;
}

// Task metrics

bool satisfies(const Entity& entity, const std::map<std::string, std::string>& constraints) {
  for (const auto& [slot, value] : constraints) {
    if (value == kDontCare) continue;
    auto it = entity.find(slot);
    if (it == entity.end() || it->second != value) return false;
  }
  return true;
}

TaskResult match_and_success(const std::vector<DialogueOutcome>& outcomes, const Database& db) {
  TaskResult r;
  for (const auto& o : outcomes) {
    if (!o.finished) continue;
    ++r.dialogues;
    const bool possible = std::any_of(db.entities().begin(), db.entities().end(),
                                      [&](const Entity& e) { return satisfies(e, o.goal.constraints); });
    bool match;
    if (possible) {
      match = o.final_pointer && *o.final_pointer < db.size() && satisfies(db[*o.final_pointer], o.goal.constraints);
    } else {
      match = !o.final_pointer;
    }
    if (!match) continue;
    ++r.matched;
    bool answered = true;
    for (const auto& slot : o.goal.requests) {
      const auto token = value_token(slot);
      std::string value;
      if (o.final_pointer && *o.final_pointer < db.size()) value = normalize(db.attribute(*o.final_pointer, slot));
      bool found = false;
      for (const auto& s : o.skeletal) found = found || std::find(s.begin(), s.end(), token) != s.end();
      if (!value.empty()) {
        for (const auto& text : o.responses) found = found || normalize(text).find(value) != std::string::npos;
      }
      answered = answered && found;
    }
    if (answered) ++r.succeeded;
  }
  return r;
}

nlohmann::json EvalReport::to_json() const {
  return {{"trackers", {{"informable", trackers.informable.to_json()}, {"requestable", trackers.requestable.to_json()}}},
          {"t1_bleu", bleu.t1},
          {"t5_bleu", bleu.t5},
          {"match_rate", task.match_rate()},
          {"success_rate", task.success_rate()},
          {"counts",
           {{"dialogues", dialogues},
            {"turns", turns},
            {"task_dialogues", task.dialogues},
            {"matched", task.matched},
            {"succeeded", task.succeeded},
            {"bleu_turns", bleu.turns},
            {"bleu_skipped", bleu.skipped},
            {"unresolved", unresolved}}},
          {"decoding", decoding},
          {"attention", attention},
          {"requestable", requestable}};
}

namespace {

std::mt19937_64 dialogue_rng(std::uint64_t seed, std::size_t i) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(i)};
  return std::mt19937_64(seq);
}

struct DialogueTrace {
  std::vector<TurnLabels> predicted;
  std::vector<std::vector<Tokens>> ranked;
  DialogueOutcome outcome;
  std::size_t unresolved = 0;
};

DialogueTrace trackers_only(const Pipeline& p, const Dialogue& d) {
  const auto& m = p.model;
  auto& ps = const_cast<ParameterStore<float>&>(m.params);
  DialogueTrace tr;
  BeliefState belief = BeliefState::initial(m.ontology, m.cfg.requestable);
  for (std::size_t t = 0; t < d.turns.size(); ++t) {
    const auto u = prepare_turn(p.lexicon, m.vocab, d.turns[t].user, true);
    std::optional<TurnInput> mt;
    if (t) mt = prepare_turn(p.lexicon, m.vocab, d.turns[t - 1].machine, false);
    belief = track_turn(ps, m.ontology, m.cfg, u, mt ? &*mt : nullptr, belief);
    tr.predicted.push_back(belief_labels(belief, m.ontology));
  }
  return tr;
}

DialogueTrace run_dialogue(const Pipeline& p, const Dialogue& d, std::size_t index, const EvalOptions& opt) {
  if (opt.trackers_only) return trackers_only(p, d);
  DialogueTrace tr;
  // Top-candidate decoding leaves the pointer draw as the only use of the
  // stream; pinning it keeps the metrics independent of the seed.
  auto rng = dialogue_rng(opt.decode.evaluation ? 1 : opt.seed, index);
  TurnState state = TurnState::initial(p.model);
  tr.outcome.goal = d.goal;
  tr.outcome.finished = d.finished;
  for (std::size_t t = 0; t < d.turns.size(); ++t) {
    const std::string* gold = t ? &d.turns[t - 1].machine : nullptr;
    auto r = p.run_turn(state, d.turns[t].user, rng, opt.decode, gold);
    tr.predicted.push_back(belief_labels(r.belief, p.model.ontology));
    std::vector<Tokens> ranked;
    for (const auto& c : r.candidates) ranked.push_back(candidate_tokens(c, p.model.vocab));
    // The chosen response leads (it differs from the top only when sampling).
    if (r.chosen != 0) std::rotate(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(r.chosen),
                                   ranked.begin() + static_cast<std::ptrdiff_t>(r.chosen) + 1);
    tr.ranked.push_back(std::move(ranked));
    tr.outcome.skeletal.push_back(r.skeletal);
    tr.outcome.responses.push_back(r.response);
    tr.outcome.final_pointer = r.pointer;
    tr.unresolved += r.unresolved ? 1 : 0;
  }
  return tr;
}

}  // namespace

EvalReport evaluate(const Pipeline& pipeline, const std::vector<Dialogue>& dialogues, const EvalOptions& opt) {
  std::vector<DialogueTrace> traces(dialogues.size());
  parallel_for(dialogues.size(), opt.policy,
               [&](std::size_t i) { traces[i] = run_dialogue(pipeline, dialogues[i], i, opt); });
  EvalReport rep;
  rep.dialogues = dialogues.size();
  rep.decoding = opt.decode.decoding.empty() ? pipeline.model.cfg.decoding : opt.decode.decoding;
  rep.attention = pipeline.model.cfg.attention;
  rep.requestable = pipeline.model.cfg.requestable;
  std::vector<TurnLabels> pred, gold;
  std::vector<std::vector<Tokens>> ranked;
  std::vector<Tokens> refs;
  std::vector<DialogueOutcome> outcomes;
  for (std::size_t i = 0; i < dialogues.size(); ++i) {
    rep.turns += dialogues[i].turns.size();
    for (std::size_t t = 0; t < dialogues[i].turns.size(); ++t) {
      pred.push_back(traces[i].predicted[t]);
      gold.push_back(dialogues[i].turns[t].labels);
      if (!opt.trackers_only) {
        ranked.push_back(traces[i].ranked[t]);
        refs.push_back(dialogues[i].turns[t].machine_delex);
      }
    }
    rep.unresolved += traces[i].unresolved;
    if (!opt.trackers_only) outcomes.push_back(std::move(traces[i].outcome));
  }
  rep.trackers = tracker_prf(pred, gold, pipeline.model.ontology);
  if (!opt.trackers_only) {
    rep.bleu = bleu(ranked, refs);
    rep.task = match_and_success(outcomes, pipeline.db);
  }
  return rep;
}

std::vector<EmbeddingRow> export_action_embeddings(const Pipeline& pipeline, const std::vector<Dialogue>& dialogues,
                                                   ExecPolicy policy) {
  std::vector<std::vector<EmbeddingRow>> per(dialogues.size());
  parallel_for(dialogues.size(), policy, [&](std::size_t i) {
    const auto& d = dialogues[i];
    auto rng = dialogue_rng(1, i);
    TurnState state = TurnState::initial(pipeline.model);
    DecodeOptions dopt;
    dopt.evaluation = true;
    for (std::size_t t = 0; t < d.turns.size(); ++t) {
      const std::string* gold = t ? &d.turns[t - 1].machine : nullptr;
      auto r = pipeline.run_turn(state, d.turns[t].user, rng, dopt, gold);
      EmbeddingRow row;
      row.id = d.id + ":" + std::to_string(t);
      row.action = r.action;
      for (std::size_t k = 0; k < 3; ++k) row.words[k] = k < r.skeletal.size() ? r.skeletal[k] : "-";
      per[i].push_back(std::move(row));
    }
  });
  std::vector<EmbeddingRow> out;
  for (auto& v : per) {
    for (auto& r : v) out.push_back(std::move(r));
  }
  return out;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

}  // namespace

void write_embeddings_csv(std::ostream& out, const std::vector<EmbeddingRow>& rows) {
  const std::size_t h = rows.empty() ? 0 : rows.front().action.size();
  out << "id";
  for (std::size_t i = 0; i < h; ++i) out << ",o" << i;
  out << ",w1,w2,w3\n";
  out << std::setprecision(9);
  for (const auto& r : rows) {
    out << csv_field(r.id);
    for (float v : r.action) out << ',' << v;
    for (const auto& w : r.words) out << ',' << csv_field(w);
    out << '\n';
  }
}

}  // namespace ndm
