#include "gnrrm/nn/gtcn.hpp"

#include "gnrrm/error.hpp"
#include "gnrrm/nn/activations.hpp"

namespace gnrrm::nn {

namespace {

struct GtcnLayerTrace final : SequenceTrace {
  Sequence x;
  std::vector<Matrix> tanh_a, sig_b;
};

struct GtcnTrace final : SequenceTrace {
  std::vector<std::unique_ptr<SequenceTrace>> layers;
};

// Per-step gradient with the final-vector term folded into the last step.
Matrix step_grad(const SequenceGrad& dy, std::size_t t, std::size_t T, Eigen::Index rows, Eigen::Index cols) {
  Matrix d = Matrix::Zero(rows, cols);
  if (!dy.d_outputs.empty() && dy.d_outputs[t].size()) d += dy.d_outputs[t];
  if (t + 1 == T && dy.d_final.size()) d += dy.d_final;
  return d;
}

}  // namespace

GtcnLayer::GtcnLayer(ParamStore& store, const std::string& prefix, Eigen::Index input, Eigen::Index output, int kernel,
                     int dilation, Rng& rng)
    : in_(input), out_(output), kernel_(kernel), dilation_(dilation) {
  if (kernel < 1 || dilation < 1) throw Error("gtcn: kernel and dilation must be >= 1");
  wa_ = store.add(prefix + ".Wa", output, kernel * input);
  ba_ = store.add(prefix + ".ba", output, 1, 1);
  wb_ = store.add(prefix + ".Wb", output, kernel * input);
  bb_ = store.add(prefix + ".bb", output, 1, 1);
  xavier_uniform(store.value(wa_), kernel * input, output, rng);
  xavier_uniform(store.value(wb_), kernel * input, output, rng);
}

SequenceResult GtcnLayer::forward(const ParamStore& p, const Sequence& x) const {
  if (x.empty()) throw Error("gtcn: empty sequence");
  const Eigen::Index B = x.front().cols();
  const Matrix& Wa = p.value(wa_);
  const Matrix& Wb = p.value(wb_);
  auto trace = std::make_unique<GtcnLayerTrace>();
  trace->x = x;
  SequenceResult r;
  r.outputs.reserve(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) {
    if (x[t].rows() != in_ || x[t].cols() != B) throw Error("gtcn: input shape mismatch");
    Matrix a = p.value(ba_).replicate(1, B);
    Matrix g = p.value(bb_).replicate(1, B);
    for (int j = 0; j < kernel_; ++j) {
      const auto lag = static_cast<std::size_t>(j) * dilation_;
      if (lag > t) break;
      a.noalias() += Wa.middleCols(j * in_, in_) * x[t - lag];
      g.noalias() += Wb.middleCols(j * in_, in_) * x[t - lag];
    }
    Matrix ta = tanh_act(a.array()).matrix();
    Matrix sg = sigmoid(g.array()).matrix();
    Matrix y = (ta.array() * sg.array()).matrix();
    if (residual()) y += x[t];
    trace->tanh_a.push_back(std::move(ta));
    trace->sig_b.push_back(std::move(sg));
    r.outputs.push_back(std::move(y));
  }
  r.final = r.outputs.back();
  if (!r.final.allFinite()) throw Error("gtcn: non-finite output");
  r.trace = std::move(trace);
  return r;
}

Sequence GtcnLayer::backward(const ParamStore& p, const SequenceTrace& base, const SequenceGrad& dy, Gradients& grads,
                             bool need_input_grad) const {
  const auto& tr = static_cast<const GtcnLayerTrace&>(base);
  const std::size_t T = tr.x.size();
  const Eigen::Index B = tr.x.front().cols();
  const Matrix& Wa = p.value(wa_);
  const Matrix& Wb = p.value(wb_);
  Sequence dx(T);
  if (need_input_grad)
    for (auto& m : dx) m = Matrix::Zero(in_, B);
  for (std::size_t t = 0; t < T; ++t) {
    const Matrix d = step_grad(dy, t, T, out_, B);
    const auto ta = tr.tanh_a[t].array();
    const auto sg = tr.sig_b[t].array();
    const Matrix da = (d.array() * sg * (1.0 - ta * ta)).matrix();
    const Matrix dg = (d.array() * ta * sg * (1.0 - sg)).matrix();
    grads[ba_] += da.rowwise().sum();
    grads[bb_] += dg.rowwise().sum();
    for (int j = 0; j < kernel_; ++j) {
      const auto lag = static_cast<std::size_t>(j) * dilation_;
      if (lag > t) break;
      const auto& xs = tr.x[t - lag];
      grads[wa_].middleCols(j * in_, in_).noalias() += da * xs.transpose();
      grads[wb_].middleCols(j * in_, in_).noalias() += dg * xs.transpose();
      if (need_input_grad) {
        dx[t - lag].noalias() += Wa.middleCols(j * in_, in_).transpose() * da;
        dx[t - lag].noalias() += Wb.middleCols(j * in_, in_).transpose() * dg;
      }
    }
    if (need_input_grad && residual()) dx[t] += d;
  }
  if (!need_input_grad) return {};
  return dx;
}

Gtcn::Gtcn(ParamStore& store, const std::string& prefix, Eigen::Index input, Eigen::Index hidden,
           const GtcnShape& shape, Rng& rng) {
  if (shape.layers < 1) throw Error("gtcn: need at least one layer");
  int dilation = 1;
  for (int l = 0; l < shape.layers; ++l) {
    layers_.emplace_back(store, prefix + ".layer" + std::to_string(l), l == 0 ? input : hidden, hidden, shape.kernel,
                         dilation, rng);
    dilation *= 2;
  }
}

SequenceResult Gtcn::forward(const ParamStore& p, const Sequence& x) const {
  auto trace = std::make_unique<GtcnTrace>();
  SequenceResult r;
  const Sequence* in = &x;
  for (const auto& layer : layers_) {
    SequenceResult lr = layer.forward(p, *in);
    trace->layers.push_back(std::move(lr.trace));
    r.outputs = std::move(lr.outputs);
    in = &r.outputs;
  }
  r.final = r.outputs.back();
  r.trace = std::move(trace);
  return r;
}

Sequence Gtcn::backward(const ParamStore& p, const SequenceTrace& base, const SequenceGrad& dy, Gradients& grads,
                        bool need_input_grad) const {
  const auto& tr = static_cast<const GtcnTrace&>(base);
  SequenceGrad g = dy;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const bool need = l > 0 || need_input_grad;
    Sequence d = layers_[l].backward(p, *tr.layers[l], g, grads, need);
    if (l == 0) return d;
    g.d_outputs = std::move(d);
    g.d_final = Matrix();
  }
  return {};
}

}  // namespace gnrrm::nn
