#pragma once

#include <cstdint>
#include <vector>

#include "gnrrm/nn/params.hpp"

namespace gnrrm::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::uint64_t step = 0;
  std::vector<Matrix> m, v;
};

AdamState make_adam(const ParamStore& store, const AdamConfig& config = {});

// One bias-corrected Adam update from the gradients held in the store.
void adam_step(ParamStore& store, AdamState& state);

}  // namespace gnrrm::nn
