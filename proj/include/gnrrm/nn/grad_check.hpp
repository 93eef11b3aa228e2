#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include "gnrrm/nn/params.hpp"

namespace gnrrm::nn {

struct GradCheckReport {
  double max_error = 0.0;  // max |analytic − fd| / max(1, |fd|)
  std::size_t worst_index = 0;
  std::size_t checked = 0;
  bool passed = true;
  std::string worst_name;
};

// Central differences (f(θ+ε) − f(θ−ε)) / 2ε for every coordinate of θ,
// compared with `analytic` under |a − fd| ≤ rtol · max(1, |fd|). θ is
// restored after each probe.
GradCheckReport grad_check(std::span<double> theta, const std::function<double()>& f,
                           std::span<const double> analytic, double rtol, double eps = 1e-5);

// Same over every parameter of `store`; `loss` must not modify the store.
GradCheckReport grad_check(ParamStore& store, const std::function<double(const ParamStore&)>& loss,
                           const Gradients& analytic, double rtol, double eps = 1e-5);

}  // namespace gnrrm::nn
