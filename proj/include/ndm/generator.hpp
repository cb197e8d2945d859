#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "ndm/config.hpp"
#include "ndm/corpus.hpp"
#include "ndm/graph.hpp"
#include "ndm/layers.hpp"
#include "ndm/policy.hpp"

namespace ndm {

template <typename Real>
void declare_generator(ParameterStore<Real>& ps, std::size_t vocab, const TrainConfig& cfg) {
  ps.add("gen.emb", {vocab, cfg.embed});
  Lstm<Real>::declare(ps, "gen.lstm", cfg.embed + cfg.hidden, cfg.hidden);
  ps.add("gen.W_out", {vocab, cfg.hidden});
  ps.add("gen.b_out", {vocab});
}

template <typename Real>
struct StepOutput {
  Var logits;
  LstmState<Real> state;
};

/// One conditional LSTM step: reads w_j together with o_t^(j) and returns
/// the logits of w_{j+1}.
template <typename Real>
StepOutput<Real> decode_step(Graph<Real>& g, ParameterStore<Real>& ps, const PolicyContext<Real>& ctx,
                             std::size_t word, LstmState<Real> prev) {
  Var w = g.row(ps.get("gen.emb"), word);
  Var o = conditioning(g, ps, ctx, w, prev.h);
  Lstm<Real> cell(ps, "gen.lstm");
  auto next = cell.step(g, g.concat({w, o}), prev);
  Var logits = g.add(g.matvec(ps.get("gen.W_out"), next.h), g.param(ps.get("gen.b_out")));
  return {logits, next};
}

/// Teacher-forced -log p(target, </s>) of one skeletal response.
template <typename Real>
Var response_loss(Graph<Real>& g, ParameterStore<Real>& ps, const PolicyContext<Real>& ctx,
                  const std::vector<std::size_t>& target) {
  Lstm<Real> cell(ps, "gen.lstm");
  LstmState<Real> state = cell.initial(g);
  std::size_t word = Vocabulary::kBos;
  std::vector<Var> losses;
  for (std::size_t j = 0; j <= target.size(); ++j) {
    auto step = decode_step(g, ps, ctx, word, state);
    const std::size_t next = j < target.size() ? target[j] : Vocabulary::kEos;
    losses.push_back(g.nll(step.logits, next));
    state = step.state;
    word = next;
  }
  return g.total(losses);
}

// Standalone language model over skeletal responses (parameters "lm.*").

template <typename Real>
void declare_lm(ParameterStore<Real>& ps, std::size_t vocab, const TrainConfig& cfg) {
  ps.add("lm.emb", {vocab, cfg.embed});
  Lstm<Real>::declare(ps, "lm.lstm", cfg.embed, cfg.hidden);
  ps.add("lm.W_out", {vocab, cfg.hidden});
  ps.add("lm.b_out", {vocab});
}

template <typename Real>
StepOutput<Real> lm_step(Graph<Real>& g, ParameterStore<Real>& ps, std::size_t word, LstmState<Real> prev) {
  Lstm<Real> cell(ps, "lm.lstm");
  auto next = cell.step(g, g.row(ps.get("lm.emb"), word), prev);
  Var logits = g.add(g.matvec(ps.get("lm.W_out"), next.h), g.param(ps.get("lm.b_out")));
  return {logits, next};
}

/// -log p_LM(tokens) where `tokens` ends with </s> (or gets one appended
/// when `append_eos`).
template <typename Real>
Var lm_loss(Graph<Real>& g, ParameterStore<Real>& ps, const std::vector<std::size_t>& tokens, bool append_eos) {
  Lstm<Real> cell(ps, "lm.lstm");
  LstmState<Real> state = cell.initial(g);
  std::size_t word = Vocabulary::kBos;
  std::vector<Var> losses;
  const std::size_t n = tokens.size() + (append_eos ? 1 : 0);
  for (std::size_t j = 0; j < n; ++j) {
    auto step = lm_step(g, ps, word, state);
    const std::size_t next = j < tokens.size() ? tokens[j] : Vocabulary::kEos;
    losses.push_back(g.nll(step.logits, next));
    state = step.state;
    word = next;
  }
  return g.total(losses);
}

/// log p_LM of a complete sequence (already ending in </s>).
template <typename Real>
double lm_logprob(ParameterStore<Real>& ps, const std::vector<std::size_t>& tokens) {
  Graph<Real> g(false);
  return -static_cast<double>(g.scalar(lm_loss(g, ps, tokens, false)));
}

}  // namespace ndm
