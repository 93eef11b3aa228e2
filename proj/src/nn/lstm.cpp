#include "gnrrm/nn/lstm.hpp"

#include "gnrrm/error.hpp"
#include "gnrrm/nn/activations.hpp"

namespace gnrrm::nn {

namespace {

struct LstmTrace final : SequenceTrace {
  Sequence x;
  std::vector<Matrix> gates;  // activated (i, f, g, o), 4H × B
  std::vector<Matrix> c, tanh_c, h;
};

}  // namespace

Lstm::Lstm(ParamStore& store, const std::string& prefix, Eigen::Index input, Eigen::Index hidden, Rng& rng)
    : in_(input), hidden_(hidden) {
  w_ = store.add(prefix + ".W", 4 * hidden, input);
  u_ = store.add(prefix + ".U", 4 * hidden, hidden);
  b_ = store.add(prefix + ".b", 4 * hidden, 1, 1);
  xavier_uniform(store.value(w_), input, 4 * hidden, rng);
  xavier_uniform(store.value(u_), hidden, 4 * hidden, rng);
  store.value(b_).middleRows(hidden, hidden).setConstant(1.0);
}

SequenceResult Lstm::forward(const ParamStore& p, const Sequence& x) const {
  if (x.empty()) throw Error("lstm: empty sequence");
  const Eigen::Index H = hidden_, B = x.front().cols();
  const Matrix& W = p.value(w_);
  const Matrix& U = p.value(u_);
  const auto b = p.value(b_).col(0);

  auto trace = std::make_unique<LstmTrace>();
  trace->x = x;
  trace->gates.reserve(x.size());
  Matrix h = Matrix::Zero(H, B), c = Matrix::Zero(H, B);
  for (const auto& xt : x) {
    if (xt.rows() != in_ || xt.cols() != B) throw Error("lstm: input shape mismatch");
    Matrix z(4 * H, B);
    z.noalias() = W * xt;
    z.noalias() += U * h;
    z.colwise() += b;
    // Gates as separate dense matrices: whole-matrix element loops treat every
    // column alike, which row blocks with unaligned columns do not.
    Matrix i = z.topRows(H), f = z.middleRows(H, H), g = z.middleRows(2 * H, H), o = z.bottomRows(H);
    i = sigmoid(i.array()).matrix();
    f = sigmoid(f.array()).matrix();
    g = tanh_act(g.array()).matrix();
    o = sigmoid(o.array()).matrix();
    c = (f.array() * c.array() + i.array() * g.array()).matrix();
    Matrix tc = tanh_act(c.array()).matrix();
    h = (o.array() * tc.array()).matrix();
    z << i, f, g, o;
    trace->gates.push_back(std::move(z));
    trace->c.push_back(c);
    trace->tanh_c.push_back(std::move(tc));
    trace->h.push_back(h);
  }
  if (!h.allFinite()) throw Error("lstm: non-finite hidden state");
  SequenceResult r;
  r.outputs = trace->h;
  r.final = h;
  r.trace = std::move(trace);
  return r;
}

Sequence Lstm::backward(const ParamStore& p, const SequenceTrace& base, const SequenceGrad& dy, Gradients& grads,
                        bool need_input_grad) const {
  const auto& tr = static_cast<const LstmTrace&>(base);
  const std::size_t T = tr.x.size();
  const Eigen::Index H = hidden_, B = tr.x.front().cols();
  const Matrix& W = p.value(w_);
  const Matrix& U = p.value(u_);
  Matrix& gW = grads[w_];
  Matrix& gU = grads[u_];
  Matrix& gb = grads[b_];

  Sequence dx;
  if (need_input_grad) dx.resize(T);
  Matrix dh_next = Matrix::Zero(H, B), dc_next = Matrix::Zero(H, B);
  Matrix dz(4 * H, B);
  for (std::size_t t = T; t-- > 0;) {
    Matrix dh = dh_next;
    if (!dy.d_outputs.empty() && dy.d_outputs[t].size()) dh += dy.d_outputs[t];
    if (t + 1 == T && dy.d_final.size()) dh += dy.d_final;

    const auto& z = tr.gates[t];
    const auto i = z.topRows(H).array();
    const auto f = z.middleRows(H, H).array();
    const auto g = z.middleRows(2 * H, H).array();
    const auto o = z.bottomRows(H).array();
    const auto tc = tr.tanh_c[t].array();

    const Matrix dc = (dc_next.array() + dh.array() * o * (1.0 - tc * tc)).matrix();
    dz.topRows(H) = (dc.array() * g * i * (1.0 - i)).matrix();
    if (t > 0) dz.middleRows(H, H) = (dc.array() * tr.c[t - 1].array() * f * (1.0 - f)).matrix();
    else dz.middleRows(H, H).setZero();
    dz.middleRows(2 * H, H) = (dc.array() * i * (1.0 - g * g)).matrix();
    dz.bottomRows(H) = (dh.array() * tc * o * (1.0 - o)).matrix();

    gW.noalias() += dz * tr.x[t].transpose();
    if (t > 0) gU.noalias() += dz * tr.h[t - 1].transpose();
    gb += dz.rowwise().sum();

    dc_next = (dc.array() * f).matrix();
    dh_next.noalias() = U.transpose() * dz;
    if (need_input_grad) dx[t].noalias() = W.transpose() * dz;
  }
  return dx;
}

LstmState lstm_cell(const ParamStore& p, const Lstm& cell, const Matrix& x, const LstmState& prev) {
  const Eigen::Index H = cell.output_size();
  Matrix z = p.value(cell.w_id()) * x + p.value(cell.u_id()) * prev.h;
  z.colwise() += p.value(cell.b_id()).col(0);
  const Eigen::ArrayXXd i = sigmoid(z.topRows(H).array());
  const Eigen::ArrayXXd f = sigmoid(z.middleRows(H, H).array());
  const Eigen::ArrayXXd g = tanh_act(z.middleRows(2 * H, H).array());
  const Eigen::ArrayXXd o = sigmoid(z.bottomRows(H).array());
  LstmState next;
  next.c = (f * prev.c.array() + i * g).matrix();
  next.h = (o * tanh_act(next.c.array())).matrix();
  return next;
}

}  // namespace gnrrm::nn
