#pragma once

#include <Eigen/Dense>

namespace gnrrm::nn {

// Saturating logistic: arguments are clamped to ±40 where σ is already 0/1 in
// double precision, so exp never overflows.
template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& x) {
  return 1.0 / (1.0 + (-x.cwiseMax(-40.0).cwiseMin(40.0)).exp());
}

// tanh(x) = 1 − 2/(exp(2x) + 1). Eigen vectorizes exp but not tanh for
// doubles; the absolute error stays at rounding level.
template <typename Derived>
auto tanh_act(const Eigen::ArrayBase<Derived>& x) {
  return 1.0 - 2.0 / ((2.0 * x.cwiseMax(-20.0).cwiseMin(20.0)).exp() + 1.0);
}

}  // namespace gnrrm::nn
