#pragma once

#include <memory>
#include <string>
#include <vector>

#include "gnrrm/nn/params.hpp"

namespace gnrrm::nn {

// T time steps, each a features × batch matrix. Batch columns are independent
// sequences that share parameters.
using Sequence = std::vector<Matrix>;

struct SequenceTrace {
  virtual ~SequenceTrace() = default;
};

struct SequenceResult {
  Sequence outputs;
  Matrix final;  // the vector a downstream layer consumes, output_size × batch
  std::unique_ptr<SequenceTrace> trace;
};

// Upstream gradients. Either member may be empty; an empty entry in
// d_outputs is a zero gradient for that step.
struct SequenceGrad {
  Sequence d_outputs;
  Matrix d_final;
};

class SequenceModel {
 public:
  virtual ~SequenceModel() = default;
  virtual Eigen::Index input_size() const = 0;
  virtual Eigen::Index output_size() const = 0;
  virtual SequenceResult forward(const ParamStore& p, const Sequence& x) const = 0;
  // Accumulates parameter gradients; returns ∂L/∂x when need_input_grad is set
  // (otherwise an empty sequence).
  virtual Sequence backward(const ParamStore& p, const SequenceTrace& trace, const SequenceGrad& dy, Gradients& grads,
                            bool need_input_grad) const = 0;
};

// Runs `forward` on x and `backward` on the time-reversed x. Outputs are the
// forward outputs stacked over the re-reversed backward outputs; final is
// [forward final; backward final].
class Bidirectional final : public SequenceModel {
 public:
  Bidirectional(std::unique_ptr<SequenceModel> forward, std::unique_ptr<SequenceModel> backward);

  Eigen::Index input_size() const override { return fwd_->input_size(); }
  Eigen::Index output_size() const override { return fwd_->output_size() + bwd_->output_size(); }
  SequenceResult forward(const ParamStore& p, const Sequence& x) const override;
  Sequence backward(const ParamStore& p, const SequenceTrace& trace, const SequenceGrad& dy, Gradients& grads,
                    bool need_input_grad) const override;

 private:
  std::unique_ptr<SequenceModel> fwd_, bwd_;
};

Sequence reversed(const Sequence& s);

enum class Backbone { Lstm, BiLstm, Gtcn, BiGtcn };

const char* to_string(Backbone b);
Backbone parse_backbone(const std::string& name);
inline bool is_bidirectional(Backbone b) { return b == Backbone::BiLstm || b == Backbone::BiGtcn; }

struct GtcnShape {
  int layers = 2;
  int kernel = 3;  // dilation doubles per layer: 1, 2, 4, ...
};

// Registers parameters under `prefix` (bidirectional models use
// `prefix.fwd` / `prefix.bwd`). Output size is hidden, or 2·hidden when
// bidirectional.
std::unique_ptr<SequenceModel> make_backbone(Backbone kind, ParamStore& store, const std::string& prefix,
                                             Eigen::Index input, Eigen::Index hidden, Rng& rng,
                                             const GtcnShape& gtcn = {});

}  // namespace gnrrm::nn
