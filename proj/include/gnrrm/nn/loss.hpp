#pragma once

#include "gnrrm/nn/params.hpp"

namespace gnrrm::nn {

struct LossResult {
  double value = 0.0;
  Vector grad;  // ∂L/∂pred = 2(pred − target)/n
};

LossResult mse_loss(const Vector& pred, const Vector& target);

}  // namespace gnrrm::nn
