#include "gnrrm/nn/adam.hpp"

#include <cmath>

namespace gnrrm::nn {

AdamState make_adam(const ParamStore& store, const AdamConfig& config) {
  AdamState s;
  s.config = config;
  s.m = store.zero_gradients();
  s.v = store.zero_gradients();
  return s;
}

void adam_step(ParamStore& store, AdamState& state) {
  const auto& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correct1 = 1.0 - std::pow(c.beta1, t);
  const double correct2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t k = 0; k < store.size(); ++k) {
    auto& p = store[k];
    auto m = state.m[k].array();
    auto v = state.v[k].array();
    const auto g = p.grad.array();
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g * g;
    p.value.array() -= c.lr * (m / correct1) / ((v / correct2).sqrt() + c.eps);
  }
}

}  // namespace gnrrm::nn
