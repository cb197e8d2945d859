#include "ndm/tensor.hpp"

#include <algorithm>

namespace ndm {

template <typename Real>
Param<Real>& ParameterStore<Real>::add(const std::string& name, std::vector<std::size_t> shape) {
  auto& p = add_zero(name, std::move(shape));
  std::uniform_real_distribution<double> dist(-kInitRange, kInitRange);
  for (auto& v : p.value.data) v = static_cast<Real>(dist(rng_));
  return p;
}

template <typename Real>
Param<Real>& ParameterStore<Real>::add_zero(const std::string& name, std::vector<std::size_t> shape) {
  if (params_.count(name)) throw std::invalid_argument("duplicate parameter " + name);
  Param<Real> p;
  p.value = Tensor<Real>(shape);
  p.grad = Tensor<Real>(shape);
  return params_.emplace(name, std::move(p)).first->second;
}

template <typename Real>
Param<Real>& ParameterStore<Real>::get(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("unknown parameter " + name);
  return it->second;
}

template <typename Real>
const Param<Real>& ParameterStore<Real>::get(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("unknown parameter " + name);
  return it->second;
}

template <typename Real>
std::vector<std::string> ParameterStore<Real>::names() const {
  std::vector<std::string> out;
  for (const auto& kv : params_) out.push_back(kv.first);
  return out;
}

template <typename Real>
std::vector<std::string> ParameterStore<Real>::names_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& kv : params_) {
    if (kv.first.compare(0, prefix.size(), prefix) == 0) out.push_back(kv.first);
  }
  return out;
}

template <typename Real>
void ParameterStore<Real>::zero_grad() {
  for (auto& kv : params_) std::fill(kv.second.grad.data.begin(), kv.second.grad.data.end(), Real(0));
}

template <typename Real>
void ParameterStore<Real>::zero_grad_if(const std::function<bool(const std::string&)>& pred) {
  for (auto& kv : params_) {
    if (pred(kv.first)) std::fill(kv.second.grad.data.begin(), kv.second.grad.data.end(), Real(0));
  }
}

template <typename Real>
void ParameterStore<Real>::fill(Real v) {
  for (auto& kv : params_) std::fill(kv.second.value.data.begin(), kv.second.value.data.end(), v);
}

template <typename Real>
std::size_t ParameterStore<Real>::total_size() const {
  std::size_t n = 0;
  for (const auto& kv : params_) n += kv.second.size();
  return n;
}

template class ParameterStore<float>;
template class ParameterStore<double>;

}  // namespace ndm
