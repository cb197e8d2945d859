#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "ndm/tensor.hpp"

namespace ndm {

using ParamFilter = std::function<bool(const std::string&)>;

struct SgdOptions {
  double learning_rate = 0.1;
  double l2 = 1e-5;
  double clip = 1.0;
};

/// One clipped, L2-regularised SGD update over the parameters accepted by
/// `filter` (all when empty). If the global gradient norm g exceeds clip,
/// every gradient is scaled by clip/g before p <- p - lr * (grad + l2 * p).
/// Returns the pre-clipping global norm. Throws std::runtime_error naming the
/// first parameter with a non-finite gradient.
template <typename Real>
double sgd_step(ParameterStore<Real>& store, const SgdOptions& opt, const ParamFilter& filter = {});

/// Global L2 norm of the gradients accepted by `filter`.
template <typename Real>
double gradient_norm(const ParameterStore<Real>& store, const ParamFilter& filter = {});

/// Loss callback for grad_check: evaluates the loss on `store`; when
/// `accumulate` is true it must also run backward so that the store's
/// gradient slots hold d(loss)/d(param).
using LossFn = std::function<double(ParameterStore<double>& store, bool accumulate)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
  /// Elements re-measured at smaller steps because `step` straddled a
  /// non-differentiable point (a max-pool switch).
  std::size_t kinks = 0;
};

struct GradCheckOptions {
  double step = 1e-3;
  /// Relative error is |a - n| / max(|a|, |n|, floor).
  double floor = 1e-2;
  /// Elements checked per parameter (evenly strided); 0 checks all.
  std::size_t max_per_param = 0;
  /// Elements above this error are re-measured at step/10 and step/100;
  /// when those two agree the smaller one stands. 0 disables.
  double retry_above = 1e-5;
  ParamFilter filter;
};

/// Compares analytic gradients with central finite differences, element by
/// element, and reports the worst relative error.
GradCheckResult grad_check(const LossFn& loss, ParameterStore<double>& store, const GradCheckOptions& opt = {});

}  // namespace ndm
