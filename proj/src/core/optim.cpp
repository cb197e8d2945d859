#include "ndm/optim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ndm {

template <typename Real>
double gradient_norm(const ParameterStore<Real>& store, const ParamFilter& filter) {
  double sq = 0.0;
  for (const auto& [name, p] : store.entries()) {
    if (filter && !filter(name)) continue;
    for (Real g : p.grad.data) sq += static_cast<double>(g) * static_cast<double>(g);
  }
  return std::sqrt(sq);
}

template <typename Real>
double sgd_step(ParameterStore<Real>& store, const SgdOptions& opt, const ParamFilter& filter) {
  for (const auto& [name, p] : store.entries()) {
    if (filter && !filter(name)) continue;
    for (Real g : p.grad.data) {
      if (!std::isfinite(static_cast<double>(g))) throw std::runtime_error("non-finite gradient in parameter " + name);
    }
  }
  const double norm = gradient_norm(store, filter);
  const double scale = (opt.clip > 0.0 && norm > opt.clip) ? opt.clip / norm : 1.0;
  const Real lr = static_cast<Real>(opt.learning_rate);
  const Real l2 = static_cast<Real>(opt.l2);
  const Real s = static_cast<Real>(scale);
  for (auto& [name, p] : store.entries()) {
    if (filter && !filter(name)) continue;
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      p.value[i] -= lr * (p.grad[i] * s + l2 * p.value[i]);
    }
  }
  return norm;
}

template double gradient_norm<float>(const ParameterStore<float>&, const ParamFilter&);
template double gradient_norm<double>(const ParameterStore<double>&, const ParamFilter&);
template double sgd_step<float>(ParameterStore<float>&, const SgdOptions&, const ParamFilter&);
template double sgd_step<double>(ParameterStore<double>&, const SgdOptions&, const ParamFilter&);

GradCheckResult grad_check(const LossFn& loss, ParameterStore<double>& store, const GradCheckOptions& opt) {
  store.zero_grad();
  loss(store, true);
  GradCheckResult res;
  for (auto& [name, p] : store.entries()) {
    if (opt.filter && !opt.filter(name)) continue;
    const std::size_t n = p.size();
    const std::size_t stride =
        (opt.max_per_param == 0 || n <= opt.max_per_param) ? 1 : (n + opt.max_per_param - 1) / opt.max_per_param;
    for (std::size_t i = 0; i < n; i += stride) {
      const double orig = p.value[i];
      auto central = [&](double h) {
        p.value[i] = orig + h;
        const double up = loss(store, false);
        p.value[i] = orig - h;
        const double down = loss(store, false);
        p.value[i] = orig;
        return (up - down) / (2.0 * h);
      };
      const double analytic = p.grad[i];
      auto relative = [&](double a, double b) {
        return std::abs(a - b) / std::max({std::abs(a), std::abs(b), opt.floor});
      };
      double numeric = central(opt.step);
      double rel = relative(analytic, numeric);
      if (opt.retry_above > 0.0 && rel > opt.retry_above) {
        const double n1 = central(opt.step / 10.0), n2 = central(opt.step / 100.0);
        if (relative(n1, n2) < opt.retry_above) {
          numeric = n2;
          rel = relative(analytic, numeric);
          ++res.kinks;
        }
      }
      ++res.checked;
      if (rel > res.max_relative_error || res.worst_parameter.empty()) {
        if (rel >= res.max_relative_error) {
          res.max_relative_error = rel;
          res.worst_parameter = name;
          res.worst_index = i;
          res.worst_analytic = analytic;
          res.worst_numeric = numeric;
        }
      }
    }
  }
  return res;
}

}  // namespace ndm
