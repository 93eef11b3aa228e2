#include "gnrrm/nn/dense.hpp"

#include "gnrrm/error.hpp"

namespace gnrrm::nn {

Dense::Dense(ParamStore& store, const std::string& prefix, Eigen::Index in, Eigen::Index out, Rng& rng)
    : in_(in), out_(out) {
  w_ = store.add(prefix + ".W", out, in);
  b_ = store.add(prefix + ".b", out, 1, 1);
  xavier_uniform(store.value(w_), in, out, rng);
}

Matrix Dense::forward(const ParamStore& p, const Matrix& x) const {
  if (x.rows() != in_) throw Error("dense: input has " + std::to_string(x.rows()) + " rows, expected " + std::to_string(in_));
  Matrix y = p.value(w_) * x;
  y.colwise() += p.value(b_).col(0);
  return y;
}

Matrix Dense::backward(const ParamStore& p, const Matrix& x, const Matrix& dy, Gradients& grads) const {
  if (dy.rows() != out_ || dy.cols() != x.cols()) throw Error("dense: gradient shape mismatch");
  grads[w_].noalias() += dy * x.transpose();
  grads[b_] += dy.rowwise().sum();
  return p.value(w_).transpose() * dy;
}

}  // namespace gnrrm::nn
