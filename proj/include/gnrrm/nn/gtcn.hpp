#pragma once

#include <string>
#include <vector>

#include "gnrrm/nn/sequence.hpp"

namespace gnrrm::nn {

// Gated causal convolution:
//   y_t = tanh(Σ_j Wa_j x_{t−j·d} + ba) ⊙ σ(Σ_j Wb_j x_{t−j·d} + bb)  [+ x_t]
// for taps j = 0..k−1 with x_{<0} = 0. The residual term is present when the
// input and output widths match. Wa, Wb are C_out × (k·C_in), tap-major.
class GtcnLayer final : public SequenceModel {
 public:
  GtcnLayer(ParamStore& store, const std::string& prefix, Eigen::Index input, Eigen::Index output, int kernel,
            int dilation, Rng& rng);

  Eigen::Index input_size() const override { return in_; }
  Eigen::Index output_size() const override { return out_; }
  bool residual() const { return in_ == out_; }
  SequenceResult forward(const ParamStore& p, const Sequence& x) const override;
  Sequence backward(const ParamStore& p, const SequenceTrace& trace, const SequenceGrad& dy, Gradients& grads,
                    bool need_input_grad) const override;

  ParamId wa_id() const { return wa_; }
  ParamId ba_id() const { return ba_; }
  ParamId wb_id() const { return wb_; }
  ParamId bb_id() const { return bb_; }

 private:
  Eigen::Index in_, out_;
  int kernel_, dilation_;
  ParamId wa_, ba_, wb_, bb_;
};

// Stack of gated layers with dilations 1, 2, 4, ...; final = last output row.
class Gtcn final : public SequenceModel {
 public:
  Gtcn(ParamStore& store, const std::string& prefix, Eigen::Index input, Eigen::Index hidden, const GtcnShape& shape,
       Rng& rng);

  Eigen::Index input_size() const override { return layers_.front().input_size(); }
  Eigen::Index output_size() const override { return layers_.back().output_size(); }
  SequenceResult forward(const ParamStore& p, const Sequence& x) const override;
  Sequence backward(const ParamStore& p, const SequenceTrace& trace, const SequenceGrad& dy, Gradients& grads,
                    bool need_input_grad) const override;

  const std::vector<GtcnLayer>& layers() const { return layers_; }

 private:
  std::vector<GtcnLayer> layers_;
};

}  // namespace gnrrm::nn
