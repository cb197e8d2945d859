#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ndm/belief.hpp"
#include "ndm/config.hpp"
#include "ndm/corpus.hpp"
#include "ndm/delex.hpp"
#include "ndm/graph.hpp"
#include "ndm/layers.hpp"

namespace ndm {

/// A delexicalised utterance ready for the networks: vocabulary ids plus the
/// match record that locates slot and value mentions.
struct TurnInput {
  std::vector<std::size_t> ids;
  std::vector<Match> matches;
  bool empty() const { return ids.empty(); }
};

/// Delexicalises and encodes `text`. An empty user turn becomes the single
/// null-turn token when `null_if_empty` is set.
TurnInput prepare_turn(const Lexicon& lexicon, const Vocabulary& vocab, const std::string& text, bool null_if_empty);

/// Positions of the mentions that feed one tracker feature block.
struct MentionPositions {
  std::vector<std::size_t> slot;                 // <s.slot>
  std::vector<std::vector<std::size_t>> values;  // per value, then dontcare (informable)
  std::vector<std::size_t> any_value;            // any <v.slot> (requestable)
};
MentionPositions mention_positions(const std::vector<Match>& matches, const std::string& slot,
                                   const std::vector<std::string>& values);

std::string informable_key(const std::string& slot);  // trk.inf.<slot>
std::string requestable_key(const std::string& slot);  // trk.req.<slot>

/// Parameters of one informable tracker. Tied across values, so the count
/// does not depend on |V_s|.
template <typename Real>
void declare_informable_tracker(ParameterStore<Real>& ps, const std::string& key, std::size_t vocab,
                                const TrainConfig& cfg) {
  const std::size_t F = cfg.hidden, H = cfg.hidden;
  ps.add(key + ".emb", {vocab, cfg.embed});
  ConvStack<Real>::declare(ps, key + ".cnn_u", cfg.embed, F, cfg.conv_layers, cfg.filter_width);
  ConvStack<Real>::declare(ps, key + ".cnn_m", cfg.embed, F, cfg.conv_layers, cfg.filter_width);
  // W_s acting on f_v, stored as the blocks shared by all values, the
  // value-specific positional block and the recurrent (p_v, p_none) block.
  ps.add(key + ".W_shared", {H, 2 * F * (1 + cfg.conv_layers)});
  ps.add(key + ".W_value", {H, 2 * F * cfg.conv_layers});
  ps.add(key + ".W_prev", {H, 2});
  ps.add(key + ".b", {H});
  ps.add(key + ".w", {H});
  ps.add(key + ".b_out", {1});
  ps.add(key + ".g_none", {1});
}

template <typename Real>
void declare_requestable_tracker(ParameterStore<Real>& ps, const std::string& key, std::size_t vocab,
                                 const TrainConfig& cfg) {
  const std::size_t F = cfg.hidden, H = cfg.hidden;
  ps.add(key + ".emb", {vocab, cfg.embed});
  ConvStack<Real>::declare(ps, key + ".cnn_u", cfg.embed, F, cfg.conv_layers, cfg.filter_width);
  ConvStack<Real>::declare(ps, key + ".cnn_m", cfg.embed, F, cfg.conv_layers, cfg.filter_width);
  ps.add(key + ".W", {H, 2 * F * (1 + 2 * cfg.conv_layers)});
  ps.add(key + ".b", {H});
  ps.add(key + ".w", {H});
  ps.add(key + ".b_out", {1});
  ps.add(key + ".g_none", {1});
}

/// CNN view of one channel; absent channels contribute zeros.
template <typename Real>
struct ChannelView {
  std::optional<ConvOutput<Real>> conv;
  std::size_t filters = 0;
  std::size_t layers = 0;
};

template <typename Real>
ChannelView<Real> run_channel(Graph<Real>& g, ParameterStore<Real>& ps, const std::string& key,
                              const std::string& channel, const TurnInput* turn, const TrainConfig& cfg) {
  ChannelView<Real> v;
  v.filters = cfg.hidden;
  v.layers = cfg.conv_layers;
  if (!turn || turn->empty()) return v;
  auto& emb = ps.get(key + ".emb");
  std::vector<Var> xs;
  xs.reserve(turn->ids.size());
  for (auto id : turn->ids) xs.push_back(g.row(emb, id));
  v.conv = conv_stack(g, ps, key + "." + channel, xs, cfg.conv_layers, cfg.filter_width);
  return v;
}

template <typename Real>
Var pooled(Graph<Real>& g, const ChannelView<Real>& c) {
  return c.conv ? c.conv->pooled : g.zeros(c.filters);
}

/// Per-layer feature vectors at `positions`, summed over occurrences and
/// concatenated across layers; zeros when there is no occurrence.
template <typename Real>
Var positional(Graph<Real>& g, const ChannelView<Real>& c, const std::vector<std::size_t>& positions) {
  std::vector<Var> parts;
  for (std::size_t l = 0; l < c.layers; ++l) {
    if (!c.conv || positions.empty()) {
      parts.push_back(g.zeros(c.filters));
      continue;
    }
    std::vector<Var> at;
    for (auto p : positions) at.push_back(c.conv->maps[l].at(p));
    parts.push_back(at.size() == 1 ? at[0] : g.sum(at));
  }
  return g.concat(parts);
}

/// Everything an informable tracker reads for one slot in one turn.
template <typename Real>
struct InformableFeatures {
  Var shared;                               // pooled and slot-positional blocks of both channels
  std::vector<std::optional<Var>> values;   // per value then dontcare; empty when never mentioned
};

template <typename Real>
InformableFeatures<Real> extract_informable(Graph<Real>& g, ParameterStore<Real>& ps, const std::string& key,
                                            const InformableSlot& slot, const TurnInput& user,
                                            const TurnInput* machine, const TrainConfig& cfg) {
  auto cu = run_channel(g, ps, key, "cnn_u", &user, cfg);
  auto cm = run_channel(g, ps, key, "cnn_m", machine, cfg);
  const auto mu = mention_positions(user.matches, slot.name, slot.values);
  const auto mm = machine ? mention_positions(machine->matches, slot.name, slot.values)
                          : mention_positions({}, slot.name, slot.values);
  InformableFeatures<Real> f;
  f.shared = g.concat({pooled(g, cu), positional(g, cu, mu.slot), pooled(g, cm), positional(g, cm, mm.slot)});
  for (std::size_t v = 0; v <= slot.values.size(); ++v) {
    if (mu.values[v].empty() && mm.values[v].empty()) {
      f.values.push_back(std::nullopt);
    } else {
      f.values.push_back(g.concat({positional(g, cu, mu.values[v]), positional(g, cm, mm.values[v])}));
    }
  }
  return f;
}

/// Full feature vector f_v for value index v (dontcare = |V_s|), as used by
/// the tied tracker: shared blocks, value blocks, then (p_v, p_none).
template <typename Real>
Var full_feature(Graph<Real>& g, const InformableFeatures<Real>& f, std::size_t v, Var prev, std::size_t value_dim) {
  const std::size_t n = g.dim(prev) - 2;
  Var value = f.values[v] ? *f.values[v] : g.zeros(value_dim);
  return g.concat({f.shared, value, g.slice(prev, v, 1), g.slice(prev, n + 1, 1)});
}

/// Logits [g_v..., g_dontcare, g_none] of one informable tracker step.
/// `prev` is the previous turn's distribution in the same layout.
template <typename Real>
Var track_informable(Graph<Real>& g, ParameterStore<Real>& ps, const std::string& key,
                     const InformableFeatures<Real>& f, Var prev) {
  auto& W_shared = ps.get(key + ".W_shared");
  auto& W_value = ps.get(key + ".W_value");
  auto& W_prev = ps.get(key + ".W_prev");
  const std::size_t n = g.dim(prev) - 2;
  if (f.values.size() != n + 1) throw std::invalid_argument("tracker features do not match the slot");
  Var common = g.add(g.matvec(W_shared, f.shared), g.param(ps.get(key + ".b")));
  Var w = g.param(ps.get(key + ".w"));
  Var b_out = g.param(ps.get(key + ".b_out"));
  std::vector<Var> logits;
  logits.reserve(n + 2);
  for (std::size_t v = 0; v <= n; ++v) {
    std::vector<Var> terms{common, g.matvec(W_prev, g.concat({g.slice(prev, v, 1), g.slice(prev, n + 1, 1)}))};
    if (f.values[v]) terms.push_back(g.matvec(W_value, *f.values[v]));
    logits.push_back(g.add(g.dot(w, g.sigmoid(g.sum(terms))), b_out));
  }
  logits.push_back(g.param(ps.get(key + ".g_none")));
  return g.concat(logits);
}

/// Logits [g_none, g_requested] of a requestable tracker (no recurrence).
template <typename Real>
Var track_requestable(Graph<Real>& g, ParameterStore<Real>& ps, const std::string& key, const std::string& slot,
                      const TurnInput& user, const TurnInput* machine, const TrainConfig& cfg) {
  auto cu = run_channel(g, ps, key, "cnn_u", &user, cfg);
  auto cm = run_channel(g, ps, key, "cnn_m", machine, cfg);
  const auto mu = mention_positions(user.matches, slot, {});
  const auto mm = machine ? mention_positions(machine->matches, slot, {}) : MentionPositions{};
  Var f = g.concat({pooled(g, cu), positional(g, cu, mu.slot), positional(g, cu, mu.any_value), pooled(g, cm),
                    positional(g, cm, mm.slot), positional(g, cm, mm.any_value)});
  Var h = g.sigmoid(g.add(g.matvec(ps.get(key + ".W"), f), g.param(ps.get(key + ".b"))));
  Var req = g.add(g.dot(g.param(ps.get(key + ".w")), h), g.param(ps.get(key + ".b_out")));
  return g.concat({g.param(ps.get(key + ".g_none")), req});
}

/// One slot's informable distribution for a turn, evaluated without a tape.
template <typename Real>
std::vector<double> informable_step(ParameterStore<Real>& ps, const InformableSlot& slot, const TurnInput& user,
                                    const TurnInput* machine, const std::vector<double>& prev, const TrainConfig& cfg) {
  Graph<Real> g(false);
  const auto key = informable_key(slot.name);
  auto f = extract_informable(g, ps, key, slot, user, machine, cfg);
  Var p = g.constant(std::vector<Real>(prev.begin(), prev.end()));
  const auto probs = Graph<Real>::softmax_values(g.value(track_informable(g, ps, key, f, p)));
  return {probs.begin(), probs.end()};
}

template <typename Real>
double requestable_step(ParameterStore<Real>& ps, const std::string& slot, const TurnInput& user,
                        const TurnInput* machine, const TrainConfig& cfg) {
  Graph<Real> g(false);
  const auto probs =
      Graph<Real>::softmax_values(g.value(track_requestable(g, ps, requestable_key(slot), slot, user, machine, cfg)));
  return probs[1];
}

/// Runs every tracker for one turn. `machine` is the previous machine turn
/// (nullptr at the first turn).
template <typename Real>
BeliefState track_turn(ParameterStore<Real>& ps, const Ontology& ontology, const TrainConfig& cfg,
                       const TurnInput& user, const TurnInput* machine, const BeliefState& prev) {
  BeliefState out;
  for (std::size_t s = 0; s < ontology.informable().size(); ++s) {
    out.informable.push_back(informable_step(ps, ontology.informable()[s], user, machine, prev.informable.at(s), cfg));
  }
  if (cfg.requestable) {
    for (const auto& r : ontology.requestable()) out.requestable.push_back(requestable_step(ps, r, user, machine, cfg));
  }
  return out;
}

/// Supervision for one turn in index form.
struct TrackerTargets {
  std::vector<std::size_t> informable;  // index into [values..., dontcare, none]
  std::vector<std::uint8_t> requested;  // per requestable slot
};
TrackerTargets tracker_targets(const TurnLabels& labels, const Ontology& ontology);

/// A dialogue prepared for the networks.
struct PreparedDialogue {
  std::vector<TurnInput> user;
  std::vector<TurnInput> machine;  // delexicalised machine turn t (fed to turn t + 1)
  std::vector<TrackerTargets> targets;
  std::vector<std::vector<std::size_t>> response;  // skeletal target ids, without </s>
};
PreparedDialogue prepare_dialogue(const Dialogue& d, const Lexicon& lexicon, const Vocabulary& vocab,
                                  const Ontology& ontology);

/// L1 of one informable tracker over a whole dialogue, with the Jordan
/// recurrence unrolled on the tape.
template <typename Real>
Var informable_dialogue_loss(Graph<Real>& g, ParameterStore<Real>& ps, const InformableSlot& slot, std::size_t s,
                             const PreparedDialogue& d, const TrainConfig& cfg) {
  const auto key = informable_key(slot.name);
  std::vector<Real> init(slot.values.size() + 2, Real(0));
  init.back() = Real(1);
  Var prev = g.constant(init);
  std::vector<Var> losses;
  for (std::size_t t = 0; t < d.user.size(); ++t) {
    const TurnInput* m = t ? &d.machine[t - 1] : nullptr;
    auto f = extract_informable(g, ps, key, slot, d.user[t], m, cfg);
    Var logits = track_informable(g, ps, key, f, prev);
    losses.push_back(g.nll(logits, d.targets[t].informable[s]));
    prev = g.softmax(logits);
  }
  return g.total(losses);
}

template <typename Real>
Var requestable_dialogue_loss(Graph<Real>& g, ParameterStore<Real>& ps, const std::string& slot, std::size_t r,
                              const PreparedDialogue& d, const TrainConfig& cfg) {
  const auto key = requestable_key(slot);
  std::vector<Var> losses;
  for (std::size_t t = 0; t < d.user.size(); ++t) {
    const TurnInput* m = t ? &d.machine[t - 1] : nullptr;
    losses.push_back(g.nll(track_requestable(g, ps, key, slot, d.user[t], m, cfg), d.targets[t].requested[r] ? 1 : 0));
  }
  return g.total(losses);
}

}  // namespace ndm
