#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace ndm {

/// Dense row-major tensor. Rank 1 (vectors) and rank 2 (matrices) are all
/// the model needs.
template <typename Real>
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<Real> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s) : shape(std::move(s)), data(count(shape), Real(0)) {}

  static std::size_t count(const std::vector<std::size_t>& s) {
    std::size_t n = 1;
    for (auto d : s) n *= d;
    return n;
  }
  std::size_t size() const { return data.size(); }
  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }
  Real& operator[](std::size_t i) { return data[i]; }
  const Real& operator[](std::size_t i) const { return data[i]; }
};

template <typename Real>
struct Param {
  Tensor<Real> value;
  Tensor<Real> grad;

  std::size_t rows() const { return value.rows(); }
  std::size_t cols() const { return value.cols(); }
  std::size_t size() const { return value.size(); }
};

/// Named trainable parameters with same-shape gradient slots.
///
/// Parameters are created in a fixed order from a seeded generator, so two
/// stores built the same way hold bit-identical values. Names sort
/// lexicographically (std::map), which also fixes the checkpoint layout.
template <typename Real>
class ParameterStore {
 public:
  static constexpr double kInitRange = 0.3;

  explicit ParameterStore(std::uint64_t seed = 0) : seed_(seed), rng_(seed) {}

  /// Adds a parameter initialised uniformly in [-0.3, 0.3].
  Param<Real>& add(const std::string& name, std::vector<std::size_t> shape);
  /// Adds a zero-initialised parameter.
  Param<Real>& add_zero(const std::string& name, std::vector<std::size_t> shape);

  bool contains(const std::string& name) const { return params_.count(name) != 0; }
  Param<Real>& get(const std::string& name);
  const Param<Real>& get(const std::string& name) const;

  std::vector<std::string> names() const;
  std::vector<std::string> names_with_prefix(const std::string& prefix) const;

  void zero_grad();
  void zero_grad_if(const std::function<bool(const std::string&)>& pred);
  void fill(Real v);

  std::size_t total_size() const;
  std::uint64_t seed() const { return seed_; }

  std::map<std::string, Param<Real>>& entries() { return params_; }
  const std::map<std::string, Param<Real>>& entries() const { return params_; }

  /// Element-type conversion (float training store <-> double grad-check store).
  template <typename Other>
  ParameterStore<Other> cast() const {
    ParameterStore<Other> out(seed_);
    for (const auto& [name, p] : params_) {
      auto& q = out.add_zero(name, p.value.shape);
      for (std::size_t i = 0; i < p.value.size(); ++i) q.value[i] = static_cast<Other>(p.value[i]);
    }
    return out;
  }

  /// Copies values of every same-named parameter from `other`.
  template <typename Other>
  void assign_from(const ParameterStore<Other>& other) {
    for (auto& [name, p] : params_) {
      if (!other.contains(name)) continue;
      const auto& q = other.get(name);
      if (q.value.shape != p.value.shape) throw std::runtime_error("shape mismatch for parameter " + name);
      for (std::size_t i = 0; i < p.value.size(); ++i) p.value[i] = static_cast<Real>(q.value[i]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 rng_;
  std::map<std::string, Param<Real>> params_;
};

}  // namespace ndm
