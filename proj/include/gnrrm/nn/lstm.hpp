#pragma once

#include <string>

#include "gnrrm/nn/sequence.hpp"

namespace gnrrm::nn {

// Packed gate layout (i, f, g, o):
//   z = W x + U h_prev + b           W: 4H × in, U: 4H × H, b: 4H
//   i, f, o = σ(z_i, z_f, z_o)   g = tanh(z_g)
//   c = f ⊙ c_prev + i ⊙ g       h = o ⊙ tanh(c)
// Unrolled from h_0 = c_0 = 0; final = h_T.
class Lstm final : public SequenceModel {
 public:
  Lstm(ParamStore& store, const std::string& prefix, Eigen::Index input, Eigen::Index hidden, Rng& rng);

  Eigen::Index input_size() const override { return in_; }
  Eigen::Index output_size() const override { return hidden_; }
  SequenceResult forward(const ParamStore& p, const Sequence& x) const override;
  Sequence backward(const ParamStore& p, const SequenceTrace& trace, const SequenceGrad& dy, Gradients& grads,
                    bool need_input_grad) const override;

  ParamId w_id() const { return w_; }
  ParamId u_id() const { return u_; }
  ParamId b_id() const { return b_; }

 private:
  Eigen::Index in_, hidden_;
  ParamId w_, u_, b_;
};

struct LstmState {
  Matrix h, c;
};

// One cell step, exposed for tests and hand evaluation.
LstmState lstm_cell(const ParamStore& p, const Lstm& cell, const Matrix& x, const LstmState& prev);

}  // namespace gnrrm::nn
