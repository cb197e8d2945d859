#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ndm/tensor.hpp"

namespace ndm {

/// Handle to a node of a Graph.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

/// Reverse-mode tape over vector-valued nodes.
///
/// Nodes are appended in evaluation order, so the tape is already a
/// topological order and backward() is a single reverse sweep. Parameter
/// gradients accumulate directly into Param::grad. With record=false the
/// graph only evaluates: no gradient buffers or closures are kept.
template <typename Real>
class Graph {
 public:
  using Vec = std::vector<Real>;

  explicit Graph(bool record = true) : record_(record) {}

  bool recording() const { return record_; }
  std::size_t size() const { return nodes_.size(); }

  const Vec& value(Var v) const { return nodes_[v.id].value; }
  Real scalar(Var v) const { return nodes_[v.id].value[0]; }
  std::size_t dim(Var v) const { return nodes_[v.id].value.size(); }

  Var constant(Vec v) { return push(std::move(v)); }
  Var zeros(std::size_t n) { return push(Vec(n, Real(0))); }

  Var param(Param<Real>& p) {
    Var out = push(p.value.data);
    if (record_) {
      nodes_[out.id].backward = [this, out, &p] {
        const Vec& g = grad(out);
        for (std::size_t i = 0; i < g.size(); ++i) p.grad[i] += g[i];
      };
    }
    return out;
  }

  /// Row r of a matrix parameter (embedding lookup).
  Var row(Param<Real>& table, std::size_t r) {
    const std::size_t n = table.cols();
    if (r >= table.rows()) throw std::out_of_range("embedding row out of range");
    Vec v(table.value.data.begin() + r * n, table.value.data.begin() + (r + 1) * n);
    Var out = push(std::move(v));
    if (record_) {
      nodes_[out.id].backward = [this, out, &table, r, n] {
        const Vec& g = grad(out);
        for (std::size_t i = 0; i < n; ++i) table.grad[r * n + i] += g[i];
      };
    }
    return out;
  }

  /// Single element of a parameter as a scalar node.
  Var element(Param<Real>& p, std::size_t i) {
    Var out = push(Vec{p.value[i]});
    if (record_) {
      nodes_[out.id].backward = [this, out, &p, i] { p.grad[i] += grad(out)[0]; };
    }
    return out;
  }

  /// W x for a [rows x cols] parameter.
  Var matvec(Param<Real>& w, Var x) {
    const std::size_t rows = w.rows(), cols = w.cols();
    if (dim(x) != cols) throw std::invalid_argument("matvec: dimension mismatch");
    Vec y(rows, Real(0));
    const Real* wd = w.value.data.data();
    const Real* xd = nodes_[x.id].value.data();
    for (std::size_t r = 0; r < rows; ++r) {
      Real acc = 0;
      const Real* wr = wd + r * cols;
      for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * xd[c];
      y[r] = acc;
    }
    Var out = push(std::move(y));
    if (record_) {
      nodes_[out.id].backward = [this, out, x, &w, rows, cols] {
        const Vec& gy = grad(out);
        const Vec& xv = value(x);
        Vec& gx = grad(x);
        const Real* wd = w.value.data.data();
        Real* gw = w.grad.data.data();
        for (std::size_t r = 0; r < rows; ++r) {
          const Real g = gy[r];
          if (g == Real(0)) continue;
          const Real* wr = wd + r * cols;
          Real* gwr = gw + r * cols;
          for (std::size_t c = 0; c < cols; ++c) {
            gx[c] += wr[c] * g;
            gwr[c] += g * xv[c];
          }
        }
      };
    }
    return out;
  }

  Var add(Var a, Var b) { return sum({a, b}); }

  Var sum(const std::vector<Var>& xs) {
    if (xs.empty()) throw std::invalid_argument("sum of nothing");
    const std::size_t n = dim(xs[0]);
    Vec y(n, Real(0));
    for (Var x : xs) {
      if (dim(x) != n) throw std::invalid_argument("sum: dimension mismatch");
      const Vec& xv = value(x);
      for (std::size_t i = 0; i < n; ++i) y[i] += xv[i];
    }
    Var out = push(std::move(y));
    if (record_) {
      nodes_[out.id].backward = [this, out, xs] {
        for (Var x : xs) {
          const Vec& g = grad(out);
          Vec& gx = grad(x);
          for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
        }
      };
    }
    return out;
  }

  Var cmul(Var a, Var b) {
    const std::size_t n = dim(a);
    if (dim(b) != n) throw std::invalid_argument("cmul: dimension mismatch");
    Vec y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = value(a)[i] * value(b)[i];
    Var out = push(std::move(y));
    if (record_) {
      nodes_[out.id].backward = [this, out, a, b, n] {
        const Vec& g = grad(out);
        for (std::size_t i = 0; i < n; ++i) {
          const Real av = value(a)[i], bv = value(b)[i];
          grad(a)[i] += g[i] * bv;
          grad(b)[i] += g[i] * av;
        }
      };
    }
    return out;
  }

  /// Scalar node s times vector node v.
  Var scale(Var s, Var v) {
    if (dim(s) != 1) throw std::invalid_argument("scale: first operand must be scalar");
    const Real sv = scalar(s);
    Vec y = value(v);
    for (auto& e : y) e *= sv;
    Var out = push(std::move(y));
    if (record_) {
      nodes_[out.id].backward = [this, out, s, v] {
        const Vec& g = grad(out);
        const Real sv = scalar(s);
        Real gs = 0;
        for (std::size_t i = 0; i < g.size(); ++i) {
          gs += g[i] * value(v)[i];
          grad(v)[i] += g[i] * sv;
        }
        grad(s)[0] += gs;
      };
    }
    return out;
  }

  Var scale(Var v, Real c) {
    Vec y = value(v);
    for (auto& e : y) e *= c;
    Var out = push(std::move(y));
    if (record_) {
      nodes_[out.id].backward = [this, out, v, c] {
        const Vec& g = grad(out);
        for (std::size_t i = 0; i < g.size(); ++i) grad(v)[i] += g[i] * c;
      };
    }
    return out;
  }

  Var tanh(Var a) {
    Vec y = value(a);
    for (auto& e : y) e = std::tanh(e);
    Var out = push(std::move(y));
    if (record_) {
      nodes_[out.id].backward = [this, out, a] {
        const Vec& g = grad(out);
        const Vec& y = value(out);
        for (std::size_t i = 0; i < g.size(); ++i) grad(a)[i] += g[i] * (Real(1) - y[i] * y[i]);
      };
    }
    return out;
  }

  Var sigmoid(Var a) {
    Vec y = value(a);
    for (auto& e : y) e = sigmoid_value(e);
    Var out = push(std::move(y));
    if (record_) {
      nodes_[out.id].backward = [this, out, a] {
        const Vec& g = grad(out);
        const Vec& y = value(out);
        for (std::size_t i = 0; i < g.size(); ++i) grad(a)[i] += g[i] * y[i] * (Real(1) - y[i]);
      };
    }
    return out;
  }

  Var concat(const std::vector<Var>& xs) {
    Vec y;
    for (Var x : xs) y.insert(y.end(), value(x).begin(), value(x).end());
    Var out = push(std::move(y));
    if (record_) {
      nodes_[out.id].backward = [this, out, xs] {
        std::size_t off = 0;
        for (Var x : xs) {
          const std::size_t n = dim(x);
          const Vec& g = grad(out);
          Vec& gx = grad(x);
          for (std::size_t i = 0; i < n; ++i) gx[i] += g[off + i];
          off += n;
        }
      };
    }
    return out;
  }

  Var slice(Var a, std::size_t offset, std::size_t len) {
    if (offset + len > dim(a)) throw std::out_of_range("slice out of range");
    Vec y(value(a).begin() + offset, value(a).begin() + offset + len);
    Var out = push(std::move(y));
    if (record_) {
      nodes_[out.id].backward = [this, out, a, offset, len] {
        const Vec& g = grad(out);
        for (std::size_t i = 0; i < len; ++i) grad(a)[offset + i] += g[i];
      };
    }
    return out;
  }

  Var dot(Var a, Var b) {
    const std::size_t n = dim(a);
    if (dim(b) != n) throw std::invalid_argument("dot: dimension mismatch");
    Real acc = 0;
    for (std::size_t i = 0; i < n; ++i) acc += value(a)[i] * value(b)[i];
    Var out = push(Vec{acc});
    if (record_) {
      nodes_[out.id].backward = [this, out, a, b, n] {
        const Real g = grad(out)[0];
        for (std::size_t i = 0; i < n; ++i) {
          const Real av = value(a)[i], bv = value(b)[i];
          grad(a)[i] += g * bv;
          grad(b)[i] += g * av;
        }
      };
    }
    return out;
  }

  /// Element-wise maximum over a list of same-size vectors. Ties go to the
  /// earliest position.
  Var max_pool(const std::vector<Var>& xs) {
    if (xs.empty()) throw std::invalid_argument("max_pool of nothing");
    const std::size_t n = dim(xs[0]);
    Vec y = value(xs[0]);
    std::vector<std::size_t> arg(n, 0);
    for (std::size_t k = 1; k < xs.size(); ++k) {
      const Vec& v = value(xs[k]);
      for (std::size_t i = 0; i < n; ++i) {
        if (v[i] > y[i]) {
          y[i] = v[i];
          arg[i] = k;
        }
      }
    }
    Var out = push(std::move(y));
    if (record_) {
      nodes_[out.id].backward = [this, out, xs, arg] {
        const Vec& g = grad(out);
        for (std::size_t i = 0; i < g.size(); ++i) grad(xs[arg[i]])[i] += g[i];
      };
    }
    return out;
  }

  Var softmax(Var a) {
    Vec y = softmax_values(value(a));
    Var out = push(std::move(y));
    if (record_) {
      nodes_[out.id].backward = [this, out, a] {
        const Vec& g = grad(out);
        const Vec& y = value(out);
        Real gy = 0;
        for (std::size_t i = 0; i < g.size(); ++i) gy += g[i] * y[i];
        for (std::size_t i = 0; i < g.size(); ++i) grad(a)[i] += y[i] * (g[i] - gy);
      };
    }
    return out;
  }

  /// -log softmax(logits)[target], as a scalar node.
  Var nll(Var logits, std::size_t target) {
    const Vec& z = value(logits);
    if (target >= z.size()) throw std::out_of_range("nll target out of range");
    Vec p = softmax_values(z);
    const Real loss = -std::log(std::max(p[target], std::numeric_limits<Real>::min()));
    Var out = push(Vec{loss});
    if (record_) {
      nodes_[out.id].backward = [this, out, logits, target, p = std::move(p)] {
        const Real g = grad(out)[0];
        Vec& gz = grad(logits);
        for (std::size_t i = 0; i < p.size(); ++i) gz[i] += g * (p[i] - (i == target ? Real(1) : Real(0)));
      };
    }
    return out;
  }

  /// Sum of scalar nodes.
  Var total(const std::vector<Var>& xs) {
    if (xs.empty()) return constant(Vec{Real(0)});
    return sum(xs);
  }

  /// Seeds d(loss)/d(loss) = 1 and sweeps the tape backwards.
  void backward(Var loss) {
    if (!record_) throw std::logic_error("backward on a non-recording graph");
    if (dim(loss) != 1) throw std::invalid_argument("backward needs a scalar loss");
    grad(loss)[0] += Real(1);
    for (int i = loss.id; i >= 0; --i) {
      if (nodes_[i].backward) nodes_[i].backward();
    }
  }

  static Real sigmoid_value(Real x) {
    if (x >= 0) return Real(1) / (Real(1) + std::exp(-x));
    const Real e = std::exp(x);
    return e / (Real(1) + e);
  }

  static Vec softmax_values(const Vec& z) {
    if (z.empty()) throw std::invalid_argument("softmax of empty vector");
    Real m = z[0];
    for (Real v : z) {
      if (!std::isfinite(v)) throw std::domain_error("non-finite logits");
      m = std::max(m, v);
    }
    Vec y(z.size());
    Real s = 0;
    for (std::size_t i = 0; i < z.size(); ++i) s += (y[i] = std::exp(z[i] - m));
    for (auto& e : y) e /= s;
    return y;
  }

 private:
  struct Node {
    Vec value;
    Vec grad;
    std::function<void()> backward;
  };

  Var push(Vec v) {
    Node n;
    if (record_) n.grad.assign(v.size(), Real(0));
    n.value = std::move(v);
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
  }

  Vec& grad(Var v) { return nodes_[v.id].grad; }

  bool record_;
  std::vector<Node> nodes_;
};

}  // namespace ndm
