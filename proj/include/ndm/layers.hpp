#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "ndm/graph.hpp"
#include "ndm/tensor.hpp"

namespace ndm {

/// Numerically stable softmax (max subtraction). Throws on non-finite input.
template <typename Real>
std::vector<Real> softmax(const std::vector<Real>& logits) {
  return Graph<Real>::softmax_values(logits);
}

template <typename Real>
struct LstmState {
  Var h;
  Var c;
};

/// Standard LSTM cell with input, forget and output gates. Parameters live
/// under `<key>.W` ([4H x (in + H)], gate order i, f, o, g) and `<key>.b`.
template <typename Real>
class Lstm {
 public:
  static void declare(ParameterStore<Real>& ps, const std::string& key, std::size_t input, std::size_t hidden) {
    ps.add(key + ".W", {4 * hidden, input + hidden});
    ps.add(key + ".b", {4 * hidden});
  }

  Lstm(ParameterStore<Real>& ps, const std::string& key)
      : w_(&ps.get(key + ".W")), b_(&ps.get(key + ".b")), hidden_(w_->rows() / 4) {}

  std::size_t hidden() const { return hidden_; }
  std::size_t input() const { return w_->cols() - hidden_; }

  LstmState<Real> initial(Graph<Real>& g) const { return {g.zeros(hidden_), g.zeros(hidden_)}; }

  LstmState<Real> step(Graph<Real>& g, Var x, LstmState<Real> prev) const {
    if (g.dim(x) != input()) throw std::invalid_argument("lstm: input size mismatch");
    Var z = g.add(g.matvec(*w_, g.concat({x, prev.h})), g.param(*b_));
    const std::size_t h = hidden_;
    Var in_gate = g.sigmoid(g.slice(z, 0, h));
    Var forget = g.sigmoid(g.slice(z, h, h));
    Var out_gate = g.sigmoid(g.slice(z, 2 * h, h));
    Var cand = g.tanh(g.slice(z, 3 * h, h));
    Var c = g.add(g.cmul(forget, prev.c), g.cmul(in_gate, cand));
    Var hid = g.cmul(out_gate, g.tanh(c));
    return {hid, c};
  }

 private:
  Param<Real>* w_;
  Param<Real>* b_;
  std::size_t hidden_;
};

template <typename Real>
struct SequenceOutput {
  std::vector<Var> hidden;
  Var final;
};

/// Runs an LSTM over a whole sequence from a zero state.
template <typename Real>
SequenceOutput<Real> lstm_sequence(Graph<Real>& g, ParameterStore<Real>& ps, const std::string& key,
                                   const std::vector<Var>& inputs) {
  if (inputs.empty()) throw std::invalid_argument("empty sequence");
  Lstm<Real> cell(ps, key);
  LstmState<Real> s = cell.initial(g);
  SequenceOutput<Real> out;
  out.hidden.reserve(inputs.size());
  for (Var x : inputs) {
    s = cell.step(g, x, s);
    out.hidden.push_back(s.h);
  }
  out.final = out.hidden.back();
  return out;
}

enum class Activation { Tanh, Identity };

template <typename Real>
struct ConvOutput {
  /// maps[layer][position], every layer as long as the input.
  std::vector<std::vector<Var>> maps;
  /// Element-wise max over positions of the top layer.
  Var pooled;
};

/// Stack of same-length 1-D convolutions. Layer k has `<key>.l<k>.W`
/// ([F x width*in]) and `<key>.l<k>.b`; each layer zero-pads width/2
/// positions on both sides, and pooling is applied after the last layer only.
template <typename Real>
class ConvStack {
 public:
  static void declare(ParameterStore<Real>& ps, const std::string& key, std::size_t input, std::size_t filters,
                      std::size_t layers, std::size_t width) {
    check_shape(layers, width);
    for (std::size_t l = 0; l < layers; ++l) {
      const std::size_t in = l == 0 ? input : filters;
      ps.add(layer_key(key, l) + ".W", {filters, width * in});
      ps.add(layer_key(key, l) + ".b", {filters});
    }
  }

  ConvStack(ParameterStore<Real>& ps, const std::string& key, std::size_t layers, std::size_t width,
            Activation act = Activation::Tanh)
      : width_(width), act_(act) {
    check_shape(layers, width);
    for (std::size_t l = 0; l < layers; ++l) {
      weights_.push_back(&ps.get(layer_key(key, l) + ".W"));
      biases_.push_back(&ps.get(layer_key(key, l) + ".b"));
    }
  }

  std::size_t filters() const { return weights_.front()->rows(); }
  std::size_t layers() const { return weights_.size(); }

  ConvOutput<Real> operator()(Graph<Real>& g, const std::vector<Var>& inputs) const {
    if (inputs.empty()) throw std::invalid_argument("empty sequence");
    ConvOutput<Real> out;
    const std::size_t half = width_ / 2;
    std::vector<Var> current = inputs;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      const std::size_t in_dim = g.dim(current.front());
      if (in_dim * width_ != weights_[l]->cols()) throw std::invalid_argument("conv: input size mismatch");
      Var pad = g.zeros(in_dim);
      Var bias = g.param(*biases_[l]);
      std::vector<Var> next;
      next.reserve(current.size());
      for (std::size_t i = 0; i < current.size(); ++i) {
        std::vector<Var> window;
        window.reserve(width_);
        for (std::size_t k = 0; k < width_; ++k) {
          const std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(i + k) - static_cast<std::ptrdiff_t>(half);
          const bool inside = pos >= 0 && pos < static_cast<std::ptrdiff_t>(current.size());
          window.push_back(inside ? current[static_cast<std::size_t>(pos)] : pad);
        }
        Var z = g.add(g.matvec(*weights_[l], g.concat(window)), bias);
        next.push_back(act_ == Activation::Tanh ? g.tanh(z) : z);
      }
      out.maps.push_back(next);
      current = std::move(next);
    }
    out.pooled = g.max_pool(current);
    return out;
  }

  static std::string layer_key(const std::string& key, std::size_t l) { return key + ".l" + std::to_string(l); }

 private:
  static void check_shape(std::size_t layers, std::size_t width) {
    if (layers < 1) throw std::invalid_argument("conv stack needs at least one layer");
    if (width % 2 == 0) throw std::invalid_argument("conv filter width must be odd");
  }

  std::size_t width_;
  Activation act_;
  std::vector<Param<Real>*> weights_;
  std::vector<Param<Real>*> biases_;
};

/// Functional form of ConvStack.
template <typename Real>
ConvOutput<Real> conv_stack(Graph<Real>& g, ParameterStore<Real>& ps, const std::string& key,
                            const std::vector<Var>& inputs, std::size_t layers, std::size_t width,
                            Activation act = Activation::Tanh) {
  return ConvStack<Real>(ps, key, layers, width, act)(g, inputs);
}

}  // namespace ndm
