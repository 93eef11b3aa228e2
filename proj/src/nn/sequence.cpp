#include "gnrrm/nn/sequence.hpp"

#include "gnrrm/error.hpp"
#include "gnrrm/nn/gtcn.hpp"
#include "gnrrm/nn/lstm.hpp"

namespace gnrrm::nn {

namespace {

struct BidirectionalTrace final : SequenceTrace {
  std::unique_ptr<SequenceTrace> fwd, bwd;
  std::size_t steps = 0;
};

}  // namespace

Sequence reversed(const Sequence& s) { return Sequence(s.rbegin(), s.rend()); }

Bidirectional::Bidirectional(std::unique_ptr<SequenceModel> forward, std::unique_ptr<SequenceModel> backward)
    : fwd_(std::move(forward)), bwd_(std::move(backward)) {
  if (fwd_->input_size() != bwd_->input_size() || fwd_->output_size() != bwd_->output_size())
    throw Error("bidirectional: forward and backward models must have matching sizes");
}

SequenceResult Bidirectional::forward(const ParamStore& p, const Sequence& x) const {
  SequenceResult f = fwd_->forward(p, x);
  SequenceResult b = bwd_->forward(p, reversed(x));
  const std::size_t T = x.size();
  const Eigen::Index H = fwd_->output_size(), B = x.front().cols();
  SequenceResult r;
  r.outputs.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    r.outputs[t].resize(2 * H, B);
    r.outputs[t].topRows(H) = f.outputs[t];
    r.outputs[t].bottomRows(H) = b.outputs[T - 1 - t];
  }
  r.final.resize(2 * H, B);
  r.final.topRows(H) = f.final;
  r.final.bottomRows(H) = b.final;
  auto trace = std::make_unique<BidirectionalTrace>();
  trace->fwd = std::move(f.trace);
  trace->bwd = std::move(b.trace);
  trace->steps = T;
  r.trace = std::move(trace);
  return r;
}

Sequence Bidirectional::backward(const ParamStore& p, const SequenceTrace& base, const SequenceGrad& dy,
                                 Gradients& grads, bool need_input_grad) const {
  const auto& tr = static_cast<const BidirectionalTrace&>(base);
  const std::size_t T = tr.steps;
  const Eigen::Index H = fwd_->output_size();
  SequenceGrad gf, gb;
  if (!dy.d_outputs.empty()) {
    gf.d_outputs.resize(T);
    gb.d_outputs.resize(T);
    for (std::size_t t = 0; t < T; ++t) {
      if (!dy.d_outputs[t].size()) continue;
      gf.d_outputs[t] = dy.d_outputs[t].topRows(H);
      gb.d_outputs[T - 1 - t] = dy.d_outputs[t].bottomRows(H);
    }
  }
  if (dy.d_final.size()) {
    gf.d_final = dy.d_final.topRows(H);
    gb.d_final = dy.d_final.bottomRows(H);
  }
  Sequence dxf = fwd_->backward(p, *tr.fwd, gf, grads, need_input_grad);
  Sequence dxb = bwd_->backward(p, *tr.bwd, gb, grads, need_input_grad);
  if (!need_input_grad) return {};
  for (std::size_t t = 0; t < T; ++t) dxf[t] += dxb[T - 1 - t];
  return dxf;
}

const char* to_string(Backbone b) {
  switch (b) {
    case Backbone::Lstm: return "lstm";
    case Backbone::BiLstm: return "bilstm";
    case Backbone::Gtcn: return "gtcn";
    case Backbone::BiGtcn: return "bigtcn";
  }
  return "?";
}

Backbone parse_backbone(const std::string& name) {
  if (name == "lstm") return Backbone::Lstm;
  if (name == "bilstm") return Backbone::BiLstm;
  if (name == "gtcn") return Backbone::Gtcn;
  if (name == "bigtcn") return Backbone::BiGtcn;
  throw ValidationError("unknown backbone '" + name + "' (expected lstm, bilstm, gtcn or bigtcn)");
}

std::unique_ptr<SequenceModel> make_backbone(Backbone kind, ParamStore& store, const std::string& prefix,
                                             Eigen::Index input, Eigen::Index hidden, Rng& rng,
                                             const GtcnShape& gtcn) {
  switch (kind) {
    case Backbone::Lstm: return std::make_unique<Lstm>(store, prefix + ".lstm", input, hidden, rng);
    case Backbone::Gtcn: return std::make_unique<Gtcn>(store, prefix + ".gtcn", input, hidden, gtcn, rng);
    case Backbone::BiLstm:
      return std::make_unique<Bidirectional>(std::make_unique<Lstm>(store, prefix + ".fwd.lstm", input, hidden, rng),
                                             std::make_unique<Lstm>(store, prefix + ".bwd.lstm", input, hidden, rng));
    case Backbone::BiGtcn:
      return std::make_unique<Bidirectional>(
          std::make_unique<Gtcn>(store, prefix + ".fwd.gtcn", input, hidden, gtcn, rng),
          std::make_unique<Gtcn>(store, prefix + ".bwd.gtcn", input, hidden, gtcn, rng));
  }
  throw Error("unhandled backbone");
}

}  // namespace gnrrm::nn
