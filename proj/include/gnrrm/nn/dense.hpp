#pragma once

#include <string>

#include "gnrrm/nn/params.hpp"

namespace gnrrm::nn {

// y = W x + b, applied column-wise to an in × batch matrix.
class Dense {
 public:
  Dense() = default;
  Dense(ParamStore& store, const std::string& prefix, Eigen::Index in, Eigen::Index out, Rng& rng);

  Eigen::Index in() const { return in_; }
  Eigen::Index out() const { return out_; }
  ParamId weight_id() const { return w_; }
  ParamId bias_id() const { return b_; }

  Matrix forward(const ParamStore& p, const Matrix& x) const;
  // Accumulates ∂L/∂W and ∂L/∂b; returns ∂L/∂x.
  Matrix backward(const ParamStore& p, const Matrix& x, const Matrix& dy, Gradients& grads) const;

 private:
  Eigen::Index in_ = 0, out_ = 0;
  ParamId w_ = 0, b_ = 0;
};

}  // namespace gnrrm::nn
