#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "ndm/belief.hpp"
#include "ndm/config.hpp"
#include "ndm/graph.hpp"
#include "ndm/ontology.hpp"

namespace ndm {

/// Per-slot belief summaries in fixed order: informable slots (summed value
/// mass, dontcare, not mentioned), then requestable slots (requested, not
/// requested) when the requestable trackers are enabled.
struct SummaryBelief {
  std::vector<std::vector<double>> slots;
  std::vector<double> flat() const;
};

SummaryBelief summarize_belief(const BeliefState& belief);

inline constexpr std::size_t kDbBins = 6;
/// Width of the attention slot summary (requestable summaries are zero-padded).
inline constexpr std::size_t kSummaryWidth = 3;

std::size_t summary_size(const Ontology& ontology, bool requestable);
std::size_t summary_slots(const Ontology& ontology, bool requestable);

template <typename Real>
void declare_policy(ParameterStore<Real>& ps, const Ontology& ontology, const TrainConfig& cfg) {
  const std::size_t H = cfg.hidden;
  ps.add("policy.W_zo", {H, H});
  ps.add("policy.W_xo", {H, kDbBins});
  if (!cfg.attention) {
    ps.add("policy.W_po", {H, summary_size(ontology, cfg.requestable)});
    return;
  }
  for (std::size_t s = 0; s < summary_slots(ontology, cfg.requestable); ++s) {
    const std::size_t width = s < ontology.informable().size() ? 3 : 2;
    ps.add("policy.att.W_po." + std::to_string(s), {H, width});
  }
  // W_r acting on z (+) x (+) p_s (+) w_j (+) h_{j-1}, stored as the block that
  // is constant over a turn and the block that changes every output step.
  ps.add("policy.att.W_r_turn", {H, H + kDbBins + kSummaryWidth});
  ps.add("policy.att.W_r_step", {H, cfg.embed + H});
  ps.add("policy.att.r", {H});
}

/// o_t = tanh(W_zo z + W_po p + W_xo x).
template <typename Real>
Var action_vector(Graph<Real>& g, ParameterStore<Real>& ps, Var z, Var summary, Var bins) {
  return g.tanh(g.sum({g.matvec(ps.get("policy.W_zo"), z), g.matvec(ps.get("policy.W_po"), summary),
                       g.matvec(ps.get("policy.W_xo"), bins)}));
}

/// Turn-level conditioning state shared by every output step.
template <typename Real>
struct PolicyContext {
  Var z;
  Var bins;
  Var action;                      // o_t when attention is off
  Var base;                        // W_zo z + W_xo x (attention)
  std::vector<Var> slot_scores;    // W_r_turn (z + x + p_s padded) per slot (attention)
  std::vector<Var> projected;      // tanh(W_po^s p_s) (attention)
  bool attention = false;
};

template <typename Real>
PolicyContext<Real> make_context(Graph<Real>& g, ParameterStore<Real>& ps, const TrainConfig& cfg, Var z,
                                 const SummaryBelief& summary, const DbBins& bins) {
  PolicyContext<Real> c;
  c.z = z;
  c.bins = g.constant(std::vector<Real>(bins.begin(), bins.end()));
  c.attention = cfg.attention;
  if (!cfg.attention) {
    const auto flat = summary.flat();
    c.action = action_vector(g, ps, z, g.constant(std::vector<Real>(flat.begin(), flat.end())), c.bins);
    return c;
  }
  c.base = g.add(g.matvec(ps.get("policy.W_zo"), z), g.matvec(ps.get("policy.W_xo"), c.bins));
  for (std::size_t s = 0; s < summary.slots.size(); ++s) {
    const auto& v = summary.slots[s];
    std::vector<Real> pad(kSummaryWidth, Real(0));
    std::copy(v.begin(), v.end(), pad.begin());
    c.slot_scores.push_back(g.matvec(ps.get("policy.att.W_r_turn"), g.concat({z, c.bins, g.constant(pad)})));
    Var raw = g.constant(std::vector<Real>(v.begin(), v.end()));
    c.projected.push_back(g.tanh(g.matvec(ps.get("policy.att.W_po." + std::to_string(s)), raw)));
  }
  return c;
}

/// Attention weights over slots for output step j.
template <typename Real>
Var attention_weights(Graph<Real>& g, ParameterStore<Real>& ps, const PolicyContext<Real>& c, Var word, Var hprev) {
  Var r = g.param(ps.get("policy.att.r"));
  Var step = g.matvec(ps.get("policy.att.W_r_step"), g.concat({word, hprev}));
  std::vector<Var> scores;
  scores.reserve(c.slot_scores.size());
  for (Var s : c.slot_scores) scores.push_back(g.dot(r, g.tanh(g.add(s, step))));
  return g.softmax(g.concat(scores));
}

/// Conditioning vector o_t^(j) for the step that reads `word` with previous
/// hidden state `hprev`. Without attention this is the constant o_t.
template <typename Real>
Var conditioning(Graph<Real>& g, ParameterStore<Real>& ps, const PolicyContext<Real>& c, Var word, Var hprev) {
  if (!c.attention) return c.action;
  Var alpha = attention_weights(g, ps, c, word, hprev);
  std::vector<Var> mix;
  mix.reserve(c.projected.size());
  for (std::size_t s = 0; s < c.projected.size(); ++s) mix.push_back(g.scale(g.slice(alpha, s, 1), c.projected[s]));
  return g.tanh(g.add(c.base, g.sum(mix)));
}

}  // namespace ndm
