#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "ndm/config.hpp"
#include "ndm/graph.hpp"
#include "ndm/layers.hpp"

namespace ndm {

template <typename Real>
void declare_intent(ParameterStore<Real>& ps, std::size_t vocab, const TrainConfig& cfg) {
  ps.add("intent.emb", {vocab, cfg.embed});
  if (cfg.encoder == "lstm") {
    Lstm<Real>::declare(ps, "intent.lstm", cfg.embed, cfg.hidden);
  } else {
    ConvStack<Real>::declare(ps, "intent.cnn", cfg.embed, cfg.hidden, cfg.conv_layers, cfg.filter_width);
  }
}

/// z_t for a delexicalised user turn: the last LSTM hidden state, or the
/// pooled top layer of the CNN stack.
template <typename Real>
Var encode_intent(Graph<Real>& g, ParameterStore<Real>& ps, const TrainConfig& cfg,
                  const std::vector<std::size_t>& ids) {
  if (ids.empty()) throw std::invalid_argument("empty user turn");
  auto& emb = ps.get("intent.emb");
  std::vector<Var> xs;
  xs.reserve(ids.size());
  for (auto id : ids) xs.push_back(g.row(emb, id));
  if (cfg.encoder == "lstm") return lstm_sequence(g, ps, "intent.lstm", xs).final;
  return conv_stack(g, ps, "intent.cnn", xs, cfg.conv_layers, cfg.filter_width).pooled;
}

}  // namespace ndm
